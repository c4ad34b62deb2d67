#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfe/diagnostics.hpp"
#include "tfe/grid_profile.hpp"
#include "tfe/initial_data.hpp"
#include "tfe/solver.hpp"

namespace tfe {

inline constexpr std::string_view kToolVersion = "1.0.0";
/// Version of the CSV/JSON output contracts.
inline constexpr std::string_view kSchemaVersion = "1";

struct GridSection {
  double x_min = -1.0;
  double x_max = 2.0;
  std::size_t n_nodes = 1024;
  bool operator==(const GridSection&) const = default;
};

/// kind: power_law, oscillatory, concentrated, source_n1, drop, zero, file.
struct InitialDataSection {
  std::string kind = "power_law";
  double x0 = 0.0;
  double beta = 1.6;
  double amplitude = 1.0;
  double width = 1.0;
  double n = 2.5;  ///< exponent entering oscillatory and concentrated data
  double delta = 0.32;
  int k_max = 4;
  double a = 2.0;   ///< source_n1 similarity parameter
  double t0 = 0.01; ///< source_n1 time
  std::string path;  ///< file: profile CSV `x,u`
  bool operator==(const InitialDataSection&) const = default;
};

struct DiagnosticsSection {
  double x0 = 0.0;
  double radius = 0.5;
  double min_cells = 4.0;
  BallMode ball = BallMode::full;
  double p_exp = 0.5;
  double c_est = 1.0;
  double C_est = 1.0;
  double theta = 1e-7;
  double margin = 0.0;  ///< 0 selects 4h
  bool monotonicity = false;
  double monotonicity_x0 = 0.0;
  bool cascade = false;
  SlippageMode cascade_mode = SlippageMode::weak;
  int cascade_k_max = 3;
  double cascade_T = 0.0;  ///< 0 selects output.t_end
  double cascade_eps = 1.0;
  std::optional<double> cascade_beta;   ///< unset selects the mode default
  std::optional<double> cascade_delta;  ///< unset selects the mode default
  double cascade_alpha = 0.05;
  bool energy_balance = false;
  double cutoff_center = 0.0;
  std::optional<double> cutoff_inner;  ///< unset with cutoff_outer: psi = 1
  std::optional<double> cutoff_outer;
  double energy_beta = 0.0;
  double energy_rel_tol = 1e-3;
  bool operator==(const DiagnosticsSection&) const = default;
};

struct OutputSection {
  double t_end = 0.01;
  double observe_every = 0.001;
  bool snapshots = true;
  bool operator==(const OutputSection&) const = default;
};

/// Parameters of the `sweep` and `validate` commands. kind: kappa, beta,
/// convergence, counterexample, inequalities.
struct StudySection {
  std::string kind = "kappa";
  std::vector<double> kappas{1.0, 2.0, 4.0, 10.0};
  std::vector<double> betas;
  std::vector<std::size_t> grids{2401, 4801, 9601};
  std::vector<double> thetas{1e-7, 1e-6, 1e-8};
  std::vector<int> k_max{4, 8, 16};
  double t_max = 10.0;
  bool matched = false;
  double delta_fraction = 0.2;
  double a = 2.0;
  double t0 = 0.01;
  double t1 = 0.02;
  double dt_factor = 1.0;
  std::size_t corpus_size = 100;
  int workers = 1;
  bool operator==(const StudySection&) const = default;
};

struct Config {
  GridSection grid;
  InitialDataSection initial_data;
  SolverConfig solver;
  DiagnosticsSection diagnostics;
  OutputSection output;
  StudySection study;
  bool operator==(const Config&) const = default;
};

/// Strict JSON configuration: sections grid, initial_data, solver,
/// diagnostics, output and study; every key optional. Unknown keys, wrong
/// types and constraint violations throw ErrorKind::config naming the
/// field; malformed JSON reports line and column.
Config parse_config(std::string_view text);

/// Full configuration with every key, parseable by parse_config.
std::string serialize_config(const Config& cfg);

/// Throws ErrorKind::config for cross-field constraint violations.
void validate_config(const Config& cfg);

/// Builds the initial profile described by the config.
Profile make_initial_profile(const Config& cfg);

/// SHA-256 of the bytes, lower-case hex.
std::string sha256_hex(std::string_view bytes);

/// Hash covering the serialized config and the initial profile values.
std::string content_hash(const Config& cfg, const Profile& u0);

enum class Command { run, criteria, diagnose, sweep, validate };
std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command c) noexcept;

struct ExecuteOptions {
  std::optional<int> workers;  ///< overrides study.workers
  std::uint64_t seed = 1;      ///< randomized corpus checks
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Executes a command and writes its artifacts and manifest.json under
/// out_dir. Returns 0 on success, 1 on a run failure or failed validation,
/// 2 on a configuration error; failures are also written to errors.json.
int execute(Command command, const Config& cfg, const std::filesystem::path& out_dir,
            const ExecuteOptions& options = {});

/// Reads and parses a config file, then executes; parse failures and
/// unreadable files give exit code 2 with errors.json.
int execute_file(Command command, const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                 const ExecuteOptions& options = {});

}  // namespace tfe
