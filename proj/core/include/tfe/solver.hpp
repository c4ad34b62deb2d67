#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tfe/grid_profile.hpp"
#include "tfe/mobility.hpp"

namespace tfe {

/// Parameters of the implicit thin-film integrator.
struct SolverConfig {
  double n = 2.5;  ///< mobility exponent, 0 < n < 3
  double dt_init = 1e-8;
  double dt_min = 1e-18;
  double dt_max = 1e-2;
  /// Tolerance on the max-norm of the residual divided by max(u_old). A
  /// residual already at the round-off level of its terms also counts as
  /// converged.
  double newton_tol = 1e-10;
  int newton_max_iter = 25;
  MobilityVariant mobility{};
  double support_threshold_rel = 1e-7;
  /// Nodes at or below this height whose neighbours are too are frozen.
  double positivity_floor = 0.0;

  // Step-size controller; halve on rejection, grow on easy convergence.
  double dt_shrink = 0.5;
  double dt_grow = 1.5;
  int easy_iters = 3;

  /// Throws ErrorKind::config naming the offending field.
  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct StepStats {
  double dt_used = 0.0;
  int newton_iters = 0;
  double residual_final = 0.0;
  int dt_rejections = 0;
};

enum class StepStatus { accepted, newton_failed, positivity_violation };

struct StepResult {
  StepStatus status = StepStatus::accepted;
  Profile profile;  ///< valid only when accepted
  StepStats stats;
};

/// One implicit-Euler step of u_t = -(M(u) u_xxx)_x in conservative flux
/// form, solved by damped Newton with a banded LU.
///
/// Throws ErrorKind::domain_exhausted if the support (relative threshold)
/// touches the two outermost nodes on either side, before or after the
/// solve. Non-convergence and negative values are reported via status.
StepResult step(const Profile& p, double dt, const SolverConfig& cfg);

/// Implicit-Euler defect per node, divided by max(p_old) (or 1 for a zero
/// profile).
std::vector<double> residual(const Profile& p_new, const Profile& p_old, double dt,
                             const SolverConfig& cfg);

/// Face fluxes M_{i+1/2} * D3_{i+1/2}, one per cell, as used by the
/// solver; zero on the two boundary faces and between dry nodes.
std::vector<double> face_fluxes(std::span<const double> u, double h, const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Time series and the adaptive driver.

struct Record {
  double t = 0.0;
  Profile profile;
  std::map<std::string, double> scalars;
};

enum class RunStatus { completed, stopped, run_failed, domain_exhausted };

std::string_view to_string(RunStatus s) noexcept;

struct TimeSeries {
  std::vector<Record> records;
  RunStatus status = RunStatus::completed;
  std::string failure;
  std::uint64_t accepted_steps = 0;
  std::uint64_t rejected_steps = 0;

  bool ok() const noexcept { return status == RunStatus::completed || status == RunStatus::stopped; }
  double t_end() const noexcept { return records.empty() ? 0.0 : records.back().t; }
};

/// Scalar diagnostic evaluated on every record.
struct Observer {
  std::string name;
  std::function<double(double t, const Profile&)> fn;
};

/// Called after every accepted step with the states on both sides.
using StepHook =
    std::function<void(double t_new, const Profile& before, const Profile& after, const StepStats&)>;

struct RunOptions {
  double t_end = 0.0;
  /// Record cadence; 0 records after every accepted step.
  double observe_every = 0.0;
  std::vector<Observer> observers;
  StepHook on_step;
  /// Optional early stop, checked on every record; the stopping record is kept.
  std::function<bool(const Record&)> stop_when;
  /// Optional early stop checked after every accepted step; when it fires
  /// the state is recorded and the run ends as stopped.
  std::function<bool(double t, const Profile&)> stop_after_step;
};

/// Adaptive implicit time stepping from u0 to t_end. Records t = 0, every
/// multiple of observe_every and t_end; each record carries `mass`,
/// `energy` and the observer scalars. Deterministic for a given input.
TimeSeries run(const Profile& u0, const SolverConfig& cfg, const RunOptions& options);

TimeSeries run(const Profile& u0, const SolverConfig& cfg, double t_end, double observe_every,
               std::vector<Observer> observers = {});

/// Absolute support threshold used by the solver for a profile.
double support_threshold(const Profile& p, double theta_rel);

}  // namespace tfe
