#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "tfe/grid_profile.hpp"
#include "tfe/mobility.hpp"
#include "tfe/solver.hpp"

namespace tfe {

// ---------------------------------------------------------------------------
// Weighted entropy and its monotonicity.

struct MonotonicityParams {
  double alpha = 0.0;
  double gamma = 0.0;
  double n = 0.0;
};

/// n < 32/11: alpha = -11n/20 + 12/20, gamma = -2.
/// n >= 32/11: alpha = (1 - n)/2, gamma = -11/10.
/// Throws unsupported_range for n outside (2, 3).
MonotonicityParams monotonicity_params(double n);

/// Trapezoidal quadrature of u^{1+alpha} |x - x0|^gamma over the nodes where
/// u > 0. Throws singular_weight when a positive node lies within 2h of x0,
/// invalid_argument when 1 + alpha <= 0.
double weighted_entropy(const Profile& p, double x0, double alpha, double gamma);

struct MonotonicityEntry {
  double t = 0.0;
  double value = 0.0;
  double increment = 0.0;  ///< value minus the previous value; 0 for the first
  bool violation = false;
};

struct MonotonicityReport {
  MonotonicityParams params;
  double x0 = 0.0;
  double tolerance = 0.0;  ///< 1e-6 * max value
  std::vector<MonotonicityEntry> entries;
  int violations = 0;
  /// Set when the support reached x0; entries stop before that record.
  std::optional<double> hypothesis_lost_at;
};

/// Weighted entropy per record at monotonicity_params(n); flags decreases
/// larger than 1e-6 times the largest value seen.
MonotonicityReport monotonicity_monitor(const TimeSeries& series, double x0, double n);

// ---------------------------------------------------------------------------
// Localized quantities on parabolic cylinders B_{r_k}(x0) x [0, T].

enum class SlippageMode { weak, strong };
std::string_view to_string(SlippageMode mode) noexcept;

struct CylinderMode {
  SlippageMode kind = SlippageMode::weak;
  double alpha = 0.05;  ///< entropy exponent, strong mode only
};

/// Default weight and smallness exponents for a mode.
struct CascadeDefaults {
  double beta = 0.0;
  double delta = 0.0;
  double alpha = 0.0;  ///< strong mode only
};

/// weak: beta = min(0.6, (1/2 + 4/(3+n)) / 2), delta = midpoint of
/// ((n + 6 - 3n)/(n + 3), 2 - n/2). strong: beta = 0.1, delta = 1,
/// alpha = 0.05.
CascadeDefaults cascade_defaults(SlippageMode mode, double n);

struct CylinderReport {
  double x0 = 0.0;
  double R = 0.0;
  int k = 0;
  double r_k = 0.0;
  double T = 0.0;
  double beta = 0.0;
  double n = 0.0;
  CylinderMode mode;
  /// sup_t of the mass in B_{r_k}.
  double M_k = 0.0;
  /// sup_t t^beta int |u_x|^2 + int_0^T t^beta int (|(u^{(n+2)/6})_x|^6 + u^n |u_xxx|^2); weak mode.
  std::optional<double> E_k;
  /// sup_t t^beta int u^{1+alpha} + int_0^T t^beta int |(u^{(n+alpha+1)/4})_x|^4; strong mode.
  std::optional<double> S_k;
  /// M_k / (T^{-1/n} r_k^{4/n+1}).
  double normalized_M = 0.0;
  /// E_k / (T^beta T^{-2/n} r_k^{8/n-1}).
  std::optional<double> normalized_E;
  /// S_k / (T^beta T^{-(1+alpha)/n} r_k^{4(1+alpha)/n+1}).
  std::optional<double> normalized_S;
};

/// Sups over the records with t <= T and trapezoidal time integrals. Third
/// differences use the solver stencil and count only on cells whose two
/// nodes exceed positivity_floor. Throws under_resolved when r_k < 4h,
/// out_of_domain when the ball leaves the grid, insufficient_resolution
/// when the series does not reach T.
CylinderReport cylinder_quantities(const TimeSeries& series, double x0, double R, int k, double T,
                                   double beta, double n, CylinderMode mode,
                                   double positivity_floor = 0.0);

struct CascadeLevel {
  int k = 0;
  double r_k = 0.0;
  double margin_M = 0.0;   ///< normalized_M / eps
  double margin_ES = 0.0;  ///< normalized_E (or S) / eps^delta
  bool pass = false;       ///< both margins <= 1
  CylinderReport cylinder;
};

struct CascadeReport {
  double eps = 0.0;
  double delta = 0.0;
  std::vector<CascadeLevel> levels;
  bool all_pass = false;
};

/// Degeneracy bounds M(k) <= eps T^{-1/n} r_k^{4/n+1} and
/// E(k) <= eps^delta T^beta T^{-2/n} r_k^{8/n-1} (weak) or
/// S(k) <= eps^delta T^beta T^{-(1+alpha)/n} r_k^{4(1+alpha)/n+1} (strong)
/// for k = 1..k_max.
CascadeReport degeneracy_cascade(const TimeSeries& series, double x0, double R, int k_max, double T,
                                 double beta, double eps, double delta, double n, CylinderMode mode,
                                 double positivity_floor = 0.0);

// ---------------------------------------------------------------------------
// Interpolation inequalities.

/// (1/q - 1/p) / (1/q + k/d - 1/r); r may be +inf.
double gns_theta(int d, int k, double q, double p, double r);

struct GnsResult {
  double theta = 0.0;
  double lhs = 0.0;           ///< ||v||_p
  double rhs = 0.0;           ///< ||D^k v||_r^theta ||v||_q^{1-theta} + ||v||_q
  double ratio = 0.0;         ///< lhs / rhs, 0 when rhs = 0
};

/// Discrete norms over [a, b] (trapezoid; max for r = inf). D^1 from cell
/// slopes, D^2 from nodal second differences. Throws invalid_argument on
/// inadmissible exponents (need 0 < q < p, 1 <= r, k in {1, 2} and
/// 0 < theta < 1) and out_of_domain when the window leaves the grid.
GnsResult gns_check(const Profile& p, int k, double p_exp, double q_exp, double r_exp, double a,
                    double b);

/// C^2 plateau cutoff: 1 on |x - center| <= inner, 0 beyond outer, quintic
/// smoothstep in between. unit() is identically 1.
struct Cutoff {
  double center = 0.0;
  double inner = std::numeric_limits<double>::infinity();
  double outer = std::numeric_limits<double>::infinity();

  static Cutoff unit() { return {}; }
  static Cutoff plateau(double center, double inner, double outer);

  double value(double x) const noexcept;
  double d1(double x) const noexcept;
  double d2(double x) const noexcept;
};

struct BernisGruenResult {
  double lhs_gradient = 0.0;  ///< int phi^6 u^{n-4} |u_x|^6
  double lhs_hessian = 0.0;   ///< int phi^6 u^{n-2} |u_xx|^2 |u_x|^2
  double rhs_dissipation = 0.0;  ///< int phi^6 u^n |u_xxx|^2
  double rhs_cutoff = 0.0;       ///< int_{phi > 0} u^{n+2} |phi_x|^6
  double ratio = 0.0;  ///< lhs total / rhs total, 0 when rhs is 0
};

/// Centered differences at the nodes two or more cells from the ends,
/// trapezoid in x. Throws hypothesis_violated when u <= 0 at a node where
/// phi > 0, unsupported_range for n outside (2 - sqrt(8/9), 3).
BernisGruenResult bernis_gruen_check(const Profile& p, const Cutoff& cutoff, double n);

struct EnergyBalanceInterval {
  double t0 = 0.0;
  double t1 = 0.0;
  /// [int 1/2 |u_x|^2 psi]_{t0}^{t1} - int int 1/2 |u_x|^2 psi_t.
  double lhs = 0.0;
  /// - int int u^n |u_xxx|^2 psi.
  double dissipation = 0.0;
  /// - int int u^n u_xxx (2 u_xx psi_x + u_x psi_xx), with the psi derivatives
  /// taken as differences of psi at cell midpoints.
  double commutator = 0.0;
  /// lhs - (dissipation + commutator).
  double residual = 0.0;
  /// Quadrature tolerance used for the inequality check.
  double tolerance = 0.0;
  bool satisfied = false;  ///< residual <= tolerance
};

struct EnergyBalanceReport {
  std::vector<EnergyBalanceInterval> intervals;
  double satisfied_fraction = 0.0;
};

struct EnergyBalanceOptions {
  double n = 2.5;
  double beta = 0.0;  ///< psi(x, t) = t^beta * cutoff(x)
  /// Face mobility; should match the run.
  MobilityVariant mobility{};
  /// Tolerance per interval, relative to |lhs| + |dissipation| + |commutator|.
  double rel_tol = 1e-3;
};

/// Weighted energy balance on consecutive records, psi = t^beta * cutoff.
/// Time integrals use the right end of each interval, so for an implicit
/// Euler run recorded every step the residual is <= 0 up to round-off when
/// psi is constant. Throws insufficient_resolution with fewer than two
/// records.
EnergyBalanceReport energy_balance_monitor(const TimeSeries& series, const Cutoff& cutoff,
                                           const EnergyBalanceOptions& options);

// ---------------------------------------------------------------------------
// Serialization.

void write_monotonicity_csv(std::ostream& os, const MonotonicityReport& r);
void write_monotonicity_json(std::ostream& os, const MonotonicityReport& r);
void write_cascade_csv(std::ostream& os, const CascadeReport& r);
void write_cascade_json(std::ostream& os, const CascadeReport& r);
void write_energy_balance_csv(std::ostream& os, const EnergyBalanceReport& r);
void write_energy_balance_json(std::ostream& os, const EnergyBalanceReport& r);

}  // namespace tfe
