#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "tfe/grid_profile.hpp"

namespace tfe {

// ---------------------------------------------------------------------------
// Initial-data families. All generators vanish for x <= x0 and are cut to
// zero over the last 10% of [x0, x0 + width] by a C^2 quintic taper.

/// Quintic smoothstep q^3 (10 - 15 q + 6 q^2); 0 at q <= 0, 1 at q >= 1.
double smoothstep(double q) noexcept;

/// Bump 64 s^3 (1 - s)^3 on [0, 1], zero outside. C^2, maximum 1 at s = 1/2.
double bump(double s) noexcept;

/// amplitude * (x - x0)_+^beta. Throws out_of_domain if [x0, x0 + width]
/// leaves the two outermost nodes on either side, invalid_argument on
/// beta <= 0, amplitude < 0 or width <= 0.
Profile power_law(const Grid1D& grid, double x0, double beta, double amplitude, double width);

/// (2 + sin(1/(x - x0))) (x - x0)_+^{4/n}.
Profile oscillatory(const Grid1D& grid, double x0, double n, double width);

/// (x - x0)_+^{4/n} + (x - x0)_+^{4/n - delta} sum_{k=2}^{k_max} k^2 bump(k^2 (x - x0 - 1/k)).
/// Throws under_resolved when k_max^2 * h > 0.5, invalid_argument unless
/// 0 <= delta < 4/n and k_max >= 2.
Profile concentrated(const Grid1D& grid, double x0, double n, double delta, int k_max, double width);

// ---------------------------------------------------------------------------
// Growth criteria at a point.

enum class CriterionKind { mass, energy, pnorm };
std::string_view to_string(CriterionKind kind) noexcept;

/// Full ball (x0 - r, x0 + r) or the one-sided interval (x0, x0 + r).
enum class BallMode { full, one_sided };
std::string_view to_string(BallMode mode) noexcept;

struct CriterionReport {
  double x0 = 0.0;
  CriterionKind kind = CriterionKind::mass;
  BallMode ball = BallMode::full;
  double n = 0.0;
  double p_exp = 0.0;  ///< pnorm only
  std::vector<double> radii;  ///< strictly decreasing
  std::vector<double> values;
  double supremum = 0.0;  ///< over the supplied (resolved) radii

  double r_min() const noexcept { return radii.empty() ? 0.0 : radii.back(); }
};

/// R, R/2, R/4, ... down to the last radius >= min_cells * h.
std::vector<double> dyadic_radii(const Grid1D& grid, double R, double min_cells = 4.0);

/// r^{-4/n} * mean of u over the ball.
CriterionReport criterion_mass(const Profile& p, double x0, double n, std::span<const double> radii,
                               BallMode ball = BallMode::full);

/// r^{-4/n+1} * (mean of |u_x|^2 over the ball)^{1/2}, with cell slopes.
CriterionReport criterion_energy(const Profile& p, double x0, double n, std::span<const double> radii,
                                 BallMode ball = BallMode::full);

/// r^{-4/n} * (mean of u^p over the ball)^{1/p}, 0 < p < 1.
CriterionReport criterion_pnorm(const Profile& p, double x0, double n, double p_exp,
                                std::span<const double> radii, BallMode ball = BallMode::full);

/// CSV `r,value`.
void write_criterion_csv(std::ostream& os, const CriterionReport& report);
/// JSON {x0, kind, ball, n, p_exp, supremum, r_min}.
void write_criterion_json(std::ostream& os, const CriterionReport& report);

// ---------------------------------------------------------------------------
// Waiting-time bounds c kappa^{-n} <= T* <= C kappa^{-n}.

struct BoundPair {
  double kappa = 0.0;
  double n = 0.0;
  double lower_T = 0.0;
  double upper_T = 0.0;
  /// kappa = 0: no forward motion is implied and both bounds are unbounded.
  bool no_forward_motion_implied = false;
};

/// Throws invalid_argument on kappa < 0, c_est < 0 or c_est > C_est, and
/// unsupported_range for n outside (1, 3).
BoundPair theorem_bounds(double kappa, double n, double c_est, double C_est);

}  // namespace tfe
