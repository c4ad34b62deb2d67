#include "tfe/initial_data.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "json.hpp"
#include "tfe/error.hpp"

namespace tfe {

namespace {

constexpr double kTaperFraction = 0.1;

void check_support(const Grid1D& g, double x0, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::invalid_argument, "width must be > 0");
  if (x0 < g.x(1) || x0 + width > g.x(g.n_nodes - 2)) {
    throw Error(ErrorKind::out_of_domain, "support [" + std::to_string(x0) + ", " +
                                              std::to_string(x0 + width) +
                                              "] leaves the grid interior");
  }
}

void check_exponent(double n) {
  if (!(n > 0.0 && n < 3.0)) throw Error(ErrorKind::invalid_argument, "n must lie in (0,3)");
}

double taper(double s, double width) {
  const double ramp = kTaperFraction * width;
  return smoothstep((width - s) / ramp);
}

template <class F>
Profile sample(const Grid1D& g, double x0, double width, F&& f) {
  std::vector<double> u(g.n_nodes, 0.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double s = g.x(i) - x0;
    if (s <= 0.0 || s >= width) continue;
    u[i] = f(s) * taper(s, width);
  }
  return Profile(g, std::move(u));
}

struct Ball {
  double a;
  double b;
  double length;
};

Ball ball_of(double x0, double r, BallMode mode) {
  if (mode == BallMode::full) return {x0 - r, x0 + r, 2.0 * r};
  return {x0, x0 + r, r};
}

double mean_nodal(const Profile& p, std::span<const double> f, double x0, double r, BallMode mode) {
  // The averaging routines carry the resolution and domain checks.
  if (mode == BallMode::full) {
    (void)local_average(p, x0, r);
  } else {
    (void)one_sided_average(p, x0, r);
  }
  const Ball ball = ball_of(x0, r, mode);
  const Grid1D& g = p.grid();
  return integrate_nodal(g, f, std::max(ball.a, g.x_min), std::min(ball.b, g.x_max())) / ball.length;
}

double mean_cellwise(const Profile& p, std::span<const double> c, double x0, double r, BallMode mode) {
  if (mode == BallMode::full) {
    (void)local_average(p, x0, r);
  } else {
    (void)one_sided_average(p, x0, r);
  }
  const Ball ball = ball_of(x0, r, mode);
  const Grid1D& g = p.grid();
  return integrate_cellwise(g, c, std::max(ball.a, g.x_min), std::min(ball.b, g.x_max())) /
         ball.length;
}

void check_radii(std::span<const double> radii) {
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0.0)) throw Error(ErrorKind::invalid_argument, "radii must be positive");
    if (j > 0 && !(radii[j] < radii[j - 1])) {
      throw Error(ErrorKind::invalid_argument, "radii must be strictly decreasing");
    }
  }
}

template <class F>
CriterionReport evaluate(double x0, double n, std::span<const double> radii,
                         BallMode ball, CriterionKind kind, F&& value_at) {
  check_exponent(n);
  check_radii(radii);
  CriterionReport rep;
  rep.x0 = x0;
  rep.kind = kind;
  rep.ball = ball;
  rep.n = n;
  rep.radii.assign(radii.begin(), radii.end());
  rep.values.reserve(radii.size());
  for (double r : radii) {
    const double v = value_at(r);
    rep.values.push_back(v);
    rep.supremum = std::max(rep.supremum, v);
  }
  return rep;
}

}  // namespace

double smoothstep(double q) noexcept {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  return q * q * q * (10.0 + q * (-15.0 + 6.0 * q));
}

double bump(double s) noexcept {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double w = s * (1.0 - s);
  return 64.0 * w * w * w;
}

Profile power_law(const Grid1D& grid, double x0, double beta, double amplitude, double width) {
  if (!(beta > 0.0)) throw Error(ErrorKind::invalid_argument, "beta must be > 0");
  if (!(amplitude >= 0.0)) throw Error(ErrorKind::invalid_argument, "amplitude must be >= 0");
  check_support(grid, x0, width);
  return sample(grid, x0, width, [&](double s) { return amplitude * std::pow(s, beta); });
}

Profile oscillatory(const Grid1D& grid, double x0, double n, double width) {
  check_exponent(n);
  check_support(grid, x0, width);
  const double beta = 4.0 / n;
  return sample(grid, x0, width,
                [&](double s) { return (2.0 + std::sin(1.0 / s)) * std::pow(s, beta); });
}

Profile concentrated(const Grid1D& grid, double x0, double n, double delta, int k_max, double width) {
  check_exponent(n);
  const double beta = 4.0 / n;
  if (!(delta >= 0.0 && delta < beta)) {
    throw Error(ErrorKind::invalid_argument, "delta must lie in [0, 4/n)");
  }
  if (k_max < 2) throw Error(ErrorKind::invalid_argument, "k_max must be >= 2");
  const double k2 = static_cast<double>(k_max) * k_max;
  if (k2 * grid.h > 0.5) {
    throw Error(ErrorKind::under_resolved,
                "bump k=" + std::to_string(k_max) + " has width 1/k^2 below 2h");
  }
  check_support(grid, x0, width);
  return sample(grid, x0, width, [&](double s) {
    double bumps = 0.0;
    for (int k = 2; k <= k_max; ++k) {
      const double kk = static_cast<double>(k) * k;
      bumps += kk * bump(kk * (s - 1.0 / k));
    }
    return std::pow(s, beta) + std::pow(s, beta - delta) * bumps;
  });
}

std::string_view to_string(CriterionKind kind) noexcept {
  switch (kind) {
    case CriterionKind::mass: return "mass";
    case CriterionKind::energy: return "energy";
    case CriterionKind::pnorm: return "pnorm";
  }
  return "unknown";
}

std::string_view to_string(BallMode mode) noexcept {
  return mode == BallMode::full ? "full" : "one_sided";
}

std::vector<double> dyadic_radii(const Grid1D& grid, double R, double min_cells) {
  if (!(R > 0.0)) throw Error(ErrorKind::invalid_argument, "R must be > 0");
  const double r_min = min_cells * grid.h;
  if (R < r_min) {
    throw Error(ErrorKind::under_resolved, "R is below " + std::to_string(min_cells) + " cells");
  }
  std::vector<double> radii;
  for (double r = R; r >= r_min * (1.0 - 1e-12); r *= 0.5) radii.push_back(r);
  return radii;
}

CriterionReport criterion_mass(const Profile& p, double x0, double n, std::span<const double> radii,
                               BallMode ball) {
  return evaluate(x0, n, radii, ball, CriterionKind::mass, [&](double r) {
    return std::pow(r, -4.0 / n) * mean_nodal(p, p.values(), x0, r, ball);
  });
}

CriterionReport criterion_energy(const Profile& p, double x0, double n, std::span<const double> radii,
                                 BallMode ball) {
  std::vector<double> slope2 = cell_gradient(p);
  for (double& s : slope2) s *= s;
  return evaluate(x0, n, radii, ball, CriterionKind::energy, [&](double r) {
    return std::pow(r, 1.0 - 4.0 / n) * std::sqrt(mean_cellwise(p, slope2, x0, r, ball));
  });
}

CriterionReport criterion_pnorm(const Profile& p, double x0, double n, double p_exp,
                                std::span<const double> radii, BallMode ball) {
  if (!(p_exp > 0.0 && p_exp < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "p_exp must lie in (0,1)");
  }
  std::vector<double> up(p.values().begin(), p.values().end());
  for (double& v : up) v = std::pow(v, p_exp);
  CriterionReport rep = evaluate(x0, n, radii, ball, CriterionKind::pnorm, [&](double r) {
    return std::pow(r, -4.0 / n) * std::pow(mean_nodal(p, up, x0, r, ball), 1.0 / p_exp);
  });
  rep.p_exp = p_exp;
  return rep;
}

void write_criterion_csv(std::ostream& os, const CriterionReport& report) {
  const auto old_prec = os.precision(17);
  os << "r,value\n";
  for (std::size_t j = 0; j < report.radii.size(); ++j) {
    os << report.radii[j] << ',' << report.values[j] << '\n';
  }
  os.precision(old_prec);
}

void write_criterion_json(std::ostream& os, const CriterionReport& report) {
  nlohmann::json j;
  j["x0"] = report.x0;
  j["kind"] = to_string(report.kind);
  j["ball"] = to_string(report.ball);
  j["n"] = report.n;
  if (report.kind == CriterionKind::pnorm) j["p_exp"] = report.p_exp;
  j["supremum"] = report.supremum;
  j["r_min"] = report.r_min();
  os << j.dump(2) << '\n';
}

BoundPair theorem_bounds(double kappa, double n, double c_est, double C_est) {
  if (!(n > 1.0 && n < 3.0)) throw Error(ErrorKind::unsupported_range, "n must lie in (1,3)");
  if (!(kappa >= 0.0)) throw Error(ErrorKind::invalid_argument, "kappa must be >= 0");
  if (!(c_est >= 0.0) || !(C_est >= c_est)) {
    throw Error(ErrorKind::invalid_argument, "need 0 <= c_est <= C_est");
  }
  BoundPair b{kappa, n, 0.0, 0.0, false};
  if (kappa == 0.0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    b.no_forward_motion_implied = true;
    b.upper_T = inf;
    b.lower_T = c_est > 0.0 ? inf : 0.0;
    return b;
  }
  const double s = std::pow(kappa, -n);
  b.lower_T = c_est * s;
  b.upper_T = C_est * s;
  return b;
}

}  // namespace tfe
