#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfe/diagnostics.hpp"
#include "tfe/free_boundary.hpp"
#include "tfe/grid_profile.hpp"
#include "tfe/initial_data.hpp"
#include "tfe/solver.hpp"

namespace tfe {

// ---------------------------------------------------------------------------
// Exact source-type solution for n = 1.

/// u = t^{-1/5} (a^2 - eta^2)_+^2 / 120 with eta = x t^{-1/5}; solves
/// u_t = -(u u_xxx)_x. Throws invalid_argument for t <= 0 or a <= 0.
double exact_source_n1(double x, double t, double a);

/// exact_source_n1 sampled on the grid nodes.
Profile exact_source_profile(const Grid1D& grid, double t, double a);

struct ConvergenceOptions {
  std::vector<std::size_t> grids{129, 257, 513};
  double x_min = -1.2;
  double x_max = 1.2;
  double a = 2.0;
  double t0 = 0.01;
  double t1 = 0.02;
  /// Fixed step dt = dt_factor * h^2, rounded down to divide t1 - t0.
  double dt_factor = 1.0;
  MobilityVariant mobility{MobilityKind::upwind_limited};
  int workers = 1;
};

struct ConvergenceRow {
  std::size_t n_nodes = 0;
  double h = 0.0;
  double dt = 0.0;
  std::uint64_t steps = 0;
  double l1_error = 0.0;
  double sup_error = 0.0;
  double mass_drift = 0.0;  ///< relative
  Profile final_profile;    ///< numerical solution at t1
};

struct ConvergenceReport {
  ConvergenceOptions options;
  std::vector<ConvergenceRow> rows;  ///< coarse to fine
  std::vector<double> l1_ratios;     ///< error(h) / error(h/2) per consecutive pair
  std::vector<double> l1_orders;     ///< log2 of the ratios, scaled by the h ratio
  std::vector<double> sup_orders;
};

/// Runs the n = 1 solver from the exact solution at t0 to t1 on each grid
/// and compares with the exact solution at t1. Throws run_failed when a
/// run does not complete.
ConvergenceReport convergence_study(const ConvergenceOptions& options);

// ---------------------------------------------------------------------------
// Waiting-time measurements.

/// Solver settings for front-tracking runs: upwind mobility (the entropy
/// mean vanishes next to a dry node and would pin the front), dt_init =
/// 1e-12, dt_max = 1e-3.
SolverConfig waiting_time_solver(double n = 2.5);

/// Interface positions sampled after every accepted step.
struct InterfaceTrack {
  std::vector<double> t;
  std::vector<double> left;
  std::vector<double> right;
};

struct WaitingRun {
  Profile u0;
  SolverConfig solver;
  double x0 = 0.0;
  double t_max = 1.0;
  /// Every threshold is detected in the same run; the first also drives
  /// the interface track.
  std::vector<double> thetas{1e-7};
  /// 0 selects 4h.
  double margin = 0.0;
};

struct WaitingRunResult {
  std::vector<WaitingTimeEstimate> estimates;  ///< one per theta
  RunStatus status = RunStatus::completed;
  std::string failure;
  std::uint64_t accepted_steps = 0;
  std::uint64_t rejected_steps = 0;
  double mass_drift = 0.0;  ///< relative, at the last state
  InterfaceTrack track;
};

/// Evolves u0 until arrival has been seen for every threshold or t_max is
/// reached; censored estimates mark the latter. Solver failures are
/// reported in status, not thrown.
WaitingRunResult measure_waiting_time(const WaitingRun& spec);

/// Least-squares line through (log x, log y).
struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Throws no_fit with fewer than two points or non-positive values.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct SweepPoint {
  double value = 0.0;  ///< swept parameter
  std::size_t n_nodes = 0;
  WaitingTimeEstimate estimate;
  std::uint64_t accepted_steps = 0;
  RunStatus status = RunStatus::completed;
};

struct SweepResult {
  std::string parameter;
  double theta = 0.0;
  std::vector<SweepPoint> points;  ///< sorted by value
  /// Present when at least four points are uncensored.
  std::optional<SlopeFit> fit;
  /// min and max of t* value^n over the uncensored points.
  double c_est = 0.0;
  double C_est = 0.0;
};

struct KappaSweepOptions {
  double n = 2.5;
  std::vector<double> kappas{1.0, 2.0, 4.0, 10.0};
  double x0 = 0.0;
  /// The first threshold is the primary one; the rest check insensitivity.
  std::vector<double> thetas{1e-7, 1e-6, 1e-8};
  double margin = 0.0;  ///< 0 selects 4h
  double t_max = 10.0;
  /// Radius of the largest dyadic ball used to normalize the shape.
  double radius = 0.5;
  SolverConfig solver = waiting_time_solver();
  /// Scale dt_init, dt_min, dt_max and t_max by (kappa / kappas[0])^-n so
  /// the runs are exact rescalings of one another.
  bool matched = false;
  int workers = 1;
};

struct KappaSweepReport {
  double n = 0.0;
  /// criterion_mass supremum of the shape before normalization.
  double shape_supremum = 0.0;
  std::vector<SweepResult> by_theta;
  std::vector<InterfaceTrack> tracks;  ///< one per kappa, primary theta
};

/// Runs kappa * shape / sup for each kappa, where sup is the full-ball
/// criterion_mass supremum of the shape at x0, and fits log t* against
/// log kappa. Throws no_fit when every primary estimate is censored.
KappaSweepReport kappa_sweep(const Profile& shape, const KappaSweepOptions& options);

enum class MotionClass { waiting, instantaneous, inconclusive };
std::string_view to_string(MotionClass c) noexcept;

struct RefinementRule {
  /// Instantaneous: t* strictly decreasing under refinement and the slope
  /// of log t* against log h at least this.
  double instantaneous_slope = 0.25;
  /// Waiting: slope at most this and the finest pair ratio at least
  /// waiting_ratio; a run censored at every level also counts as waiting.
  double waiting_slope = 0.1;
  double waiting_ratio = 0.9;
};

struct RefinementTrend {
  std::vector<double> h;
  std::vector<double> t_star;
  double slope = 0.0;         ///< d log t* / d log h
  double finest_ratio = 0.0;  ///< t*(finest) / t*(next coarser)
  MotionClass motion = MotionClass::inconclusive;
};

/// Classifies a sequence of waiting times ordered coarse to fine.
RefinementTrend classify_refinement(const std::vector<double>& h, const std::vector<WaitingTimeEstimate>& est,
                                    const RefinementRule& rule = {});

struct BetaSweepOptions {
  double n = 2.5;
  /// Empty selects 4/n - 0.3 and 4/n + 0.3.
  std::vector<double> betas;
  std::vector<std::size_t> grids{2401, 4801, 9601};
  double x_min = -1.0;
  double x_max = 2.0;
  double x0 = 0.0;
  double width = 1.0;
  std::vector<double> thetas{1e-7, 1e-6, 1e-8};
  double margin_cells = 4.0;
  double t_max = 0.5;
  SolverConfig solver = waiting_time_solver();
  RefinementRule rule;
  int workers = 1;
};

struct BetaClassification {
  double beta = 0.0;
  double theta = 0.0;
  RefinementTrend trend;
};

struct BetaSweepReport {
  double n = 0.0;
  std::vector<SweepPoint> points;  ///< primary theta, by beta then grid
  std::vector<BetaClassification> classes;  ///< by beta then theta
  std::vector<InterfaceTrack> tracks;       ///< aligned with points
};

/// Waiting times of power_law(x0, beta, 1, width) for every beta and grid,
/// classified per beta and threshold by their refinement trend.
BetaSweepReport beta_sweep(const BetaSweepOptions& options);

struct CounterexampleOptions {
  double n = 2.5;
  double x_min = -1.0;
  double x_max = 2.0;
  double x0 = 0.0;
  double width = 1.0;
  /// Largest ball radius for the criteria.
  double radius = 0.5;
  std::vector<std::size_t> grids{2401, 4801, 9601};
  std::vector<int> k_max{4, 8, 16};
  /// delta = delta_fraction * 4/n.
  double delta_fraction = 0.2;
  double p_exp = 0.5;
  /// The energy trend uses radii where the local wavelength 2 pi r^2 of the
  /// oscillation spans at least this many cells.
  double oscillation_cells = 8.0;
  std::vector<double> thetas{1e-7, 1e-6, 1e-8};
  double t_max = 0.5;
  SolverConfig solver = waiting_time_solver();
  RefinementRule rule;
  int workers = 1;
};

struct OscillatoryReport {
  CriterionReport mass;
  CriterionReport energy;
  CriterionReport baseline_mass;  ///< power_law with beta = 4/n
  double mass_ratio_min = 0.0;    ///< over radii, against the baseline
  double mass_ratio_max = 0.0;
  /// Energy values at r / 4 exceed those at r for every pair of resolved
  /// radii.
  bool energy_growing = false;
  std::size_t energy_resolved_radii = 0;
  std::vector<SweepPoint> waiting;  ///< one per grid
  RefinementTrend trend;
};

struct ConcentratedLevel {
  int k_max = 0;
  CriterionReport mass;
  CriterionReport pnorm;
  SweepPoint waiting;
};

struct ConcentratedReport {
  double delta = 0.0;
  std::size_t n_nodes = 0;  ///< coarsest grid resolving every bump
  std::vector<ConcentratedLevel> levels;
  bool mass_increasing = false;
  bool t_star_decreasing = false;
};

struct CounterexampleReport {
  OscillatoryReport oscillatory;
  ConcentratedReport concentrated;
};

/// Criteria on the finest grid and waiting times for the oscillatory and
/// concentrated data.
CounterexampleReport counterexample_study(const CounterexampleOptions& options);

struct InequalityOptions {
  double n = 2.5;
  std::size_t corpus_size = 100;
  std::uint64_t seed = 1;
  /// Coarse grid on [-1, 1]; the refined grid has 2 n_nodes - 1 nodes.
  std::size_t n_nodes = 401;
  /// Cutoff for the Bernis-Gruen check and the energy balance.
  double cutoff_inner = 0.3;
  double cutoff_outer = 0.6;
  /// GNS exponents (k, p, q, r) checked on the corpus.
  int gns_k = 1;
  double gns_p = 6.0;
  double gns_q = 2.0;
  double gns_r = 2.0;
  /// Energy-balance run: spreading drop recorded every step up to t_end.
  double balance_t_end = 0.05;
  std::size_t balance_nodes = 401;
};

struct InequalityReport {
  double gns_theta_reference = 0.0;  ///< theta for (d,k,q,p,r) = (1,1,2,6,2)
  double bernis_gruen_max = 0.0;     ///< max ratio, coarse grid
  double bernis_gruen_max_refined = 0.0;
  double bernis_gruen_drift = 0.0;  ///< |refined / coarse - 1|
  double gns_max = 0.0;
  double gns_max_refined = 0.0;
  double gns_drift = 0.0;
  EnergyBalanceReport balance;
};

/// Random corpus u = A (1 - b x^2) + sum_m e_m sin(m pi x + phi_m) on
/// [-1, 1], strictly positive on the cutoff support; plus the energy
/// balance on a spreading-drop run with the plateau cutoff.
InequalityReport inequality_study(const InequalityOptions& options);

// ---------------------------------------------------------------------------
// Summaries. CSV columns are fixed and documented in the README.

void write_track_csv(std::ostream& os, const InterfaceTrack& track);

void write_convergence_summary_csv(std::ostream& os, const ConvergenceReport& r);
void write_convergence_summary_json(std::ostream& os, const ConvergenceReport& r);
void write_kappa_summary_csv(std::ostream& os, const KappaSweepReport& r);
void write_kappa_summary_json(std::ostream& os, const KappaSweepReport& r);
void write_beta_summary_csv(std::ostream& os, const BetaSweepReport& r);
void write_beta_summary_json(std::ostream& os, const BetaSweepReport& r);
void write_counterexample_summary_csv(std::ostream& os, const CounterexampleReport& r);
void write_counterexample_summary_json(std::ostream& os, const CounterexampleReport& r);
void write_inequality_summary_csv(std::ostream& os, const InequalityReport& r);
void write_inequality_summary_json(std::ostream& os, const InequalityReport& r);

}  // namespace tfe
