#include "tfe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "json.hpp"
#include "tfe/error.hpp"
#include "tfe/initial_data.hpp"

namespace tfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Trapezoid weights for nodes of a uniform grid.
double node_weight(const Grid1D& g, std::size_t i) {
  return (i == 0 || i + 1 == g.n_nodes) ? 0.5 * g.h : g.h;
}

double third_difference(std::span<const double> u, std::size_t f, double h) {
  return (u[f + 2] - 3.0 * u[f + 1] + 3.0 * u[f] - u[f - 1]) / (h * h * h);
}

std::vector<double> powered(std::span<const double> u, double m) {
  std::vector<double> v(u.begin(), u.end());
  for (double& x : v) x = x > 0.0 ? std::pow(x, m) : 0.0;
  return v;
}

// Records with t <= T; throws when the series stops short of T.
std::vector<const Record*> records_up_to(const TimeSeries& series, double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::invalid_argument, "horizon T must be > 0");
  std::vector<const Record*> out;
  for (const Record& r : series.records) {
    if (r.t <= T * (1.0 + 1e-12)) out.push_back(&r);
  }
  if (out.empty() || out.front()->t != 0.0) {
    throw Error(ErrorKind::insufficient_resolution, "series must start at t = 0");
  }
  if (out.back()->t < T * (1.0 - 1e-9)) {
    throw Error(ErrorKind::insufficient_resolution,
                "series ends at t = " + std::to_string(out.back()->t) + " before T");
  }
  return out;
}

double trapezoid_in_time(const std::vector<const Record*>& recs, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t j = 1; j < recs.size(); ++j) s += 0.5 * (g[j] + g[j - 1]) * (recs[j]->t - recs[j - 1]->t);
  return s;
}

void check_ball(const Grid1D& g, double x0, double r) {
  if (r < 4.0 * g.h * (1.0 - 1e-12)) {
    throw Error(ErrorKind::under_resolved, "r_k = " + std::to_string(r) + " is below 4h");
  }
  if (x0 - r < g.x_min - 1e-9 * g.h || x0 + r > g.x_max() + 1e-9 * g.h) {
    throw Error(ErrorKind::out_of_domain, "ball around x0 leaves the grid");
  }
}

// Integral over the ball of u^n |u_xxx|^2 on cells whose nodes both exceed
// the floor.
double ball_dissipation(const Profile& p, double n, double a, double b, double floor) {
  const auto u = p.values();
  const Grid1D& g = p.grid();
  std::vector<double> cell(u.size() - 1, 0.0);
  for (std::size_t f = 1; f + 3 <= u.size(); ++f) {
    if (!(u[f] > floor && u[f + 1] > floor)) continue;
    const double d3 = third_difference(u, f, g.h);
    cell[f] = 0.5 * (std::pow(u[f], n) + std::pow(u[f + 1], n)) * d3 * d3;
  }
  return integrate_cellwise(g, cell, a, b);
}

// Integral over the ball of |(u^m)_x|^q.
double ball_gradient_power(const Profile& p, double m, double q, double a, double b) {
  const std::vector<double> v = powered(p.values(), m);
  std::vector<double> cell(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    cell[i] = std::pow(std::abs(v[i + 1] - v[i]) / p.grid().h, q);
  }
  return integrate_cellwise(p.grid(), cell, a, b);
}

}  // namespace

MonotonicityParams monotonicity_params(double n) {
  if (!(n > 2.0 && n < 3.0)) {
    throw Error(ErrorKind::unsupported_range, "monotonicity parameters need n in (2,3)");
  }
  if (n < 32.0 / 11.0) return {-11.0 * n / 20.0 + 12.0 / 20.0, -2.0, n};
  return {(1.0 - n) / 2.0, -11.0 / 10.0, n};
}

double weighted_entropy(const Profile& p, double x0, double alpha, double gamma) {
  if (!(1.0 + alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "need 1 + alpha > 0");
  const Grid1D& g = p.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) continue;
    const double dist = std::abs(g.x(i) - x0);
    if (dist < 2.0 * g.h * (1.0 - 1e-12)) {
      throw Error(ErrorKind::singular_weight,
                  "support within 2h of x0 = " + std::to_string(x0));
    }
    s += node_weight(g, i) * std::pow(p[i], 1.0 + alpha) * std::pow(dist, gamma);
  }
  return s;
}

MonotonicityReport monotonicity_monitor(const TimeSeries& series, double x0, double n) {
  MonotonicityReport rep;
  rep.params = monotonicity_params(n);
  rep.x0 = x0;
  for (const Record& r : series.records) {
    double v = 0.0;
    try {
      v = weighted_entropy(r.profile, x0, rep.params.alpha, rep.params.gamma);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::singular_weight) throw;
      rep.hypothesis_lost_at = r.t;
      break;
    }
    MonotonicityEntry e{r.t, v, 0.0, false};
    if (!rep.entries.empty()) e.increment = v - rep.entries.back().value;
    rep.entries.push_back(e);
  }
  double vmax = 0.0;
  for (const auto& e : rep.entries) vmax = std::max(vmax, e.value);
  rep.tolerance = 1e-6 * vmax;
  for (auto& e : rep.entries) {
    e.violation = e.increment < -rep.tolerance;
    if (e.violation) ++rep.violations;
  }
  return rep;
}

std::string_view to_string(SlippageMode mode) noexcept {
  return mode == SlippageMode::weak ? "weak" : "strong";
}

CascadeDefaults cascade_defaults(SlippageMode mode, double n) {
  if (mode == SlippageMode::strong) return {0.1, 1.0, 0.05};
  constexpr double d = 1.0;
  const double beta = std::min(0.6, 0.5 * (0.5 + (3.0 + d) / (3.0 + n * d)));
  const double lo = (d * n + 6.0 - 3.0 * n) / (d * n + 3.0);
  const double hi = 2.0 - n / 2.0;
  return {beta, 0.5 * (lo + hi), 0.0};
}

CylinderReport cylinder_quantities(const TimeSeries& series, double x0, double R, int k, double T,
                                   double beta, double n, CylinderMode mode, double positivity_floor) {
  if (!(n > 0.0 && n < 3.0)) throw Error(ErrorKind::invalid_argument, "n must lie in (0,3)");
  if (!(R > 0.0) || k < 0) throw Error(ErrorKind::invalid_argument, "need R > 0 and k >= 0");
  if (!(beta >= 0.0)) throw Error(ErrorKind::invalid_argument, "beta must be >= 0");
  if (mode.kind == SlippageMode::strong && !(mode.alpha > -1.0)) {
    throw Error(ErrorKind::invalid_argument, "strong mode needs alpha > -1");
  }
  const auto recs = records_up_to(series, T);
  const Grid1D& g = recs.front()->profile.grid();
  const double r = R / std::ldexp(1.0, k);
  check_ball(g, x0, r);
  const double a = x0 - r;
  const double b = x0 + r;

  CylinderReport rep;
  rep.x0 = x0;
  rep.R = R;
  rep.k = k;
  rep.r_k = r;
  rep.T = T;
  rep.beta = beta;
  rep.n = n;
  rep.mode = mode;

  std::vector<double> dissipation(recs.size());
  double sup_weighted = 0.0;
  for (std::size_t j = 0; j < recs.size(); ++j) {
    const Profile& p = recs[j]->profile;
    const double tb = std::pow(recs[j]->t, beta);
    rep.M_k = std::max(rep.M_k, integrate_nodal(g, p.values(), a, b));
    if (mode.kind == SlippageMode::weak) {
      sup_weighted = std::max(sup_weighted, tb * ball_gradient_power(p, 1.0, 2.0, a, b));
      dissipation[j] = tb * (ball_gradient_power(p, (n + 2.0) / 6.0, 6.0, a, b) +
                             ball_dissipation(p, n, a, b, positivity_floor));
    } else {
      const std::vector<double> ua = powered(p.values(), 1.0 + mode.alpha);
      sup_weighted = std::max(sup_weighted, tb * integrate_nodal(g, ua, a, b));
      dissipation[j] = tb * ball_gradient_power(p, (n + mode.alpha + 1.0) / 4.0, 4.0, a, b);
    }
  }
  const double total = sup_weighted + trapezoid_in_time(recs, dissipation);

  rep.normalized_M = rep.M_k / (std::pow(T, -1.0 / n) * std::pow(r, 4.0 / n + 1.0));
  const double tb = std::pow(T, beta);
  if (mode.kind == SlippageMode::weak) {
    rep.E_k = total;
    rep.normalized_E = total / (tb * std::pow(T, -2.0 / n) * std::pow(r, 8.0 / n - 1.0));
  } else {
    const double a1 = 1.0 + mode.alpha;
    rep.S_k = total;
    rep.normalized_S = total / (tb * std::pow(T, -a1 / n) * std::pow(r, 4.0 * a1 / n + 1.0));
  }
  return rep;
}

CascadeReport degeneracy_cascade(const TimeSeries& series, double x0, double R, int k_max, double T,
                                 double beta, double eps, double delta, double n, CylinderMode mode,
                                 double positivity_floor) {
  if (!(eps > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::invalid_argument, "need eps, delta > 0");
  if (k_max < 1) throw Error(ErrorKind::invalid_argument, "k_max must be >= 1");
  CascadeReport rep;
  rep.eps = eps;
  rep.delta = delta;
  rep.all_pass = true;
  const double eps_delta = std::pow(eps, delta);
  for (int k = 1; k <= k_max; ++k) {
    CascadeLevel lvl;
    lvl.k = k;
    lvl.cylinder = cylinder_quantities(series, x0, R, k, T, beta, n, mode, positivity_floor);
    lvl.r_k = lvl.cylinder.r_k;
    lvl.margin_M = lvl.cylinder.normalized_M / eps;
    const double es = mode.kind == SlippageMode::weak ? *lvl.cylinder.normalized_E
                                                      : *lvl.cylinder.normalized_S;
    lvl.margin_ES = es / eps_delta;
    lvl.pass = lvl.margin_M <= 1.0 && lvl.margin_ES <= 1.0;
    rep.all_pass = rep.all_pass && lvl.pass;
    rep.levels.push_back(std::move(lvl));
  }
  return rep;
}

double gns_theta(int d, int k, double q, double p, double r) {
  // Denominators cleared by p q r d, so integer exponents stay exact up to
  // the final division.
  const double dd = static_cast<double>(d);
  const double kk = static_cast<double>(k);
  if (std::isinf(r)) return (p - q) * dd / (p * dd + kk * p * q);
  return (p - q) * r * dd / (p * r * dd + kk * p * q * r - p * q * dd);
}

GnsResult gns_check(const Profile& prof, int k, double p_exp, double q_exp, double r_exp, double a,
                    double b) {
  if (!(q_exp > 0.0 && q_exp < p_exp) || !(r_exp >= 1.0) || (k != 1 && k != 2)) {
    throw Error(ErrorKind::invalid_argument, "GNS needs 0 < q < p, r >= 1 and k in {1,2}");
  }
  const Grid1D& g = prof.grid();
  if (!(b > a) || a < g.x_min - 1e-9 * g.h || b > g.x_max() + 1e-9 * g.h) {
    throw Error(ErrorKind::out_of_domain, "GNS window must be a nonempty interval in the grid");
  }
  GnsResult res;
  res.theta = gns_theta(1, k, q_exp, p_exp, r_exp);
  if (!(res.theta > 0.0 && res.theta < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "GNS exponent theta outside (0,1)");
  }
  a = std::max(a, g.x_min);
  b = std::min(b, g.x_max());
  const auto u = prof.values();
  const auto lp_norm = [&](double e) {
    std::vector<double> f(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) f[i] = std::pow(std::abs(u[i]), e);
    return std::pow(integrate_nodal(g, f, a, b), 1.0 / e);
  };
  double dk_norm = 0.0;
  if (k == 1) {
    const std::vector<double> s = cell_gradient(prof);
    if (std::isinf(r_exp)) {
      const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor((a - g.x_min) / g.h)));
      const auto c1 = std::min(s.size() - 1, static_cast<std::size_t>(std::ceil((b - g.x_min) / g.h)) - 1);
      for (std::size_t c = c0; c <= c1; ++c) dk_norm = std::max(dk_norm, std::abs(s[c]));
    } else {
      std::vector<double> sp(s.size());
      for (std::size_t c = 0; c < s.size(); ++c) sp[c] = std::pow(std::abs(s[c]), r_exp);
      dk_norm = std::pow(integrate_cellwise(g, sp, a, b), 1.0 / r_exp);
    }
  } else {
    std::vector<double> d2(u.size(), 0.0);
    for (std::size_t i = 1; i + 1 < u.size(); ++i) d2[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (g.h * g.h);
    d2.front() = d2[1];
    d2.back() = d2[u.size() - 2];
    if (std::isinf(r_exp)) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (g.x(i) >= a - 1e-9 * g.h && g.x(i) <= b + 1e-9 * g.h) dk_norm = std::max(dk_norm, std::abs(d2[i]));
      }
    } else {
      for (double& v : d2) v = std::pow(std::abs(v), r_exp);
      dk_norm = std::pow(integrate_nodal(g, d2, a, b), 1.0 / r_exp);
    }
  }
  res.lhs = lp_norm(p_exp);
  const double vq = lp_norm(q_exp);
  res.rhs = std::pow(dk_norm, res.theta) * std::pow(vq, 1.0 - res.theta) + vq;
  res.ratio = res.rhs > 0.0 ? res.lhs / res.rhs : 0.0;
  return res;
}

Cutoff Cutoff::plateau(double center, double inner, double outer) {
  if (!(inner >= 0.0 && outer > inner)) {
    throw Error(ErrorKind::invalid_argument, "cutoff needs 0 <= inner < outer");
  }
  return {center, inner, outer};
}

double Cutoff::value(double x) const noexcept {
  if (std::isinf(outer)) return 1.0;
  const double q = (outer - std::abs(x - center)) / (outer - inner);
  return smoothstep(q);
}

double Cutoff::d1(double x) const noexcept {
  if (std::isinf(outer)) return 0.0;
  const double w = outer - inner;
  const double dist = std::abs(x - center);
  if (dist <= inner || dist >= outer) return 0.0;
  const double q = (outer - dist) / w;
  const double ds = 30.0 * q * q * (1.0 - q) * (1.0 - q);
  const double sign = x >= center ? 1.0 : -1.0;
  return -sign * ds / w;
}

double Cutoff::d2(double x) const noexcept {
  if (std::isinf(outer)) return 0.0;
  const double w = outer - inner;
  const double dist = std::abs(x - center);
  if (dist <= inner || dist >= outer) return 0.0;
  const double q = (outer - dist) / w;
  const double dds = 60.0 * q * (1.0 - q) * (1.0 - 2.0 * q);
  return dds / (w * w);
}

BernisGruenResult bernis_gruen_check(const Profile& p, const Cutoff& cutoff, double n) {
  const double n_lo = 2.0 - std::sqrt(8.0 / 9.0);
  if (!(n > n_lo && n < 3.0)) {
    throw Error(ErrorKind::unsupported_range, "Bernis-Gruen inequality needs n in (2 - sqrt(8/9), 3)");
  }
  const Grid1D& g = p.grid();
  const auto u = p.values();
  const double h = g.h;
  BernisGruenResult res;
  for (std::size_t i = 2; i + 2 < u.size(); ++i) {
    const double x = g.x(i);
    const double phi = cutoff.value(x);
    if (!(phi > 0.0)) continue;
    if (!(u[i] > 0.0)) {
      throw Error(ErrorKind::hypothesis_violated,
                  "u vanishes at x = " + std::to_string(x) + " inside the cutoff support");
    }
    const double ux = (u[i + 1] - u[i - 1]) / (2.0 * h);
    const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
    const double uxxx = (u[i + 2] - 2.0 * u[i + 1] + 2.0 * u[i - 1] - u[i - 2]) / (2.0 * h * h * h);
    const double phi6 = std::pow(phi, 6.0);
    const double w = h;
    res.lhs_gradient += w * phi6 * std::pow(u[i], n - 4.0) * std::pow(ux, 6.0);
    res.lhs_hessian += w * phi6 * std::pow(u[i], n - 2.0) * uxx * uxx * ux * ux;
    res.rhs_dissipation += w * phi6 * std::pow(u[i], n) * uxxx * uxxx;
    res.rhs_cutoff += w * std::pow(u[i], n + 2.0) * std::pow(std::abs(cutoff.d1(x)), 6.0);
  }
  const double rhs = res.rhs_dissipation + res.rhs_cutoff;
  res.ratio = rhs > 0.0 ? (res.lhs_gradient + res.lhs_hessian) / rhs : 0.0;
  return res;
}

namespace {

struct BalanceDensities {
  double energy = 0.0;       // int 1/2 |u_x|^2 phi
  double dissipation = 0.0;  // int M |D3|^2 phi
  double commutator = 0.0;   // int M D3 (2 u_xx phi_x + u_x phi_xx)
};

BalanceDensities balance_densities(const Profile& p, const Cutoff& cutoff, const SolverConfig& cfg) {
  const Grid1D& g = p.grid();
  const auto u = p.values();
  const double h = g.h;
  const std::size_t cells = u.size() - 1;
  std::vector<double> psi(cells);
  std::vector<double> slope(cells);
  BalanceDensities d;
  for (std::size_t c = 0; c < cells; ++c) {
    psi[c] = cutoff.value(g.x(c) + 0.5 * h);
    slope[c] = (u[c + 1] - u[c]) / h;
    d.energy += 0.5 * h * psi[c] * slope[c] * slope[c];
  }
  // Summation by parts of the discrete energy against the flux divergence
  // gives sum_c h J_c D^2(psi D+u)_c; the product rule splits that into the
  // dissipation psi_c J_c D3_c and the remainder below.
  const std::vector<double> flux = face_fluxes(u, h, cfg);
  for (std::size_t c = 1; c + 1 < cells; ++c) {
    if (flux[c] == 0.0) continue;
    const double d3 = third_difference(u, c, h);
    const double rest = ((psi[c + 1] - psi[c]) * slope[c + 1] + (psi[c - 1] - psi[c]) * slope[c - 1]) / (h * h);
    d.dissipation += h * flux[c] * d3 * psi[c];
    d.commutator += h * flux[c] * rest;
  }
  return d;
}

}  // namespace

EnergyBalanceReport energy_balance_monitor(const TimeSeries& series, const Cutoff& cutoff,
                                           const EnergyBalanceOptions& opt) {
  if (series.records.size() < 2) {
    throw Error(ErrorKind::insufficient_resolution, "energy balance needs at least two records");
  }
  if (!(opt.beta >= 0.0)) throw Error(ErrorKind::invalid_argument, "beta must be >= 0");
  SolverConfig cfg;
  cfg.n = opt.n;
  cfg.mobility = opt.mobility;

  EnergyBalanceReport rep;
  const auto weight = [&](double t) { return opt.beta == 0.0 ? 1.0 : std::pow(t, opt.beta); };
  BalanceDensities prev = balance_densities(series.records.front().profile, cutoff, cfg);
  int satisfied = 0;
  for (std::size_t j = 1; j < series.records.size(); ++j) {
    const double t0 = series.records[j - 1].t;
    const double t1 = series.records[j].t;
    const BalanceDensities cur = balance_densities(series.records[j].profile, cutoff, cfg);
    const double w0 = weight(t0);
    const double w1 = weight(t1);
    const double dt = t1 - t0;

    EnergyBalanceInterval iv;
    iv.t0 = t0;
    iv.t1 = t1;
    // Backward rectangle rule in time, the quadrature implicit Euler is
    // consistent with; the psi_t term takes the left energy so that the
    // left side reduces to w1 (e1 - e0).
    iv.lhs = w1 * cur.energy - w0 * prev.energy - prev.energy * (w1 - w0);
    iv.dissipation = -w1 * cur.dissipation * dt;
    iv.commutator = -w1 * cur.commutator * dt;
    iv.residual = iv.lhs - (iv.dissipation + iv.commutator);
    iv.tolerance = opt.rel_tol * (std::abs(iv.lhs) + std::abs(iv.dissipation) + std::abs(iv.commutator));
    iv.satisfied = iv.residual <= iv.tolerance;
    if (iv.satisfied) ++satisfied;
    rep.intervals.push_back(iv);
    prev = cur;
  }
  rep.satisfied_fraction = static_cast<double>(satisfied) / static_cast<double>(rep.intervals.size());
  return rep;
}

void write_monotonicity_csv(std::ostream& os, const MonotonicityReport& r) {
  const auto old = os.precision(17);
  os << "t,value,increment,violation\n";
  for (const auto& e : r.entries) os << e.t << ',' << e.value << ',' << e.increment << ',' << e.violation << '\n';
  os.precision(old);
}

void write_monotonicity_json(std::ostream& os, const MonotonicityReport& r) {
  nlohmann::json j;
  j["x0"] = r.x0;
  j["n"] = r.params.n;
  j["alpha"] = r.params.alpha;
  j["gamma"] = r.params.gamma;
  j["tolerance"] = r.tolerance;
  j["records"] = r.entries.size();
  j["violations"] = r.violations;
  j["hypothesis_lost_at"] = r.hypothesis_lost_at ? nlohmann::json(*r.hypothesis_lost_at) : nlohmann::json();
  os << j.dump(2) << '\n';
}

void write_cascade_csv(std::ostream& os, const CascadeReport& r) {
  const auto old = os.precision(17);
  os << "k,r_k,M_k,ES_k,normalized_M,normalized_ES,margin_M,margin_ES,pass\n";
  for (const auto& l : r.levels) {
    const auto& c = l.cylinder;
    const double es = c.E_k ? *c.E_k : *c.S_k;
    const double nes = c.normalized_E ? *c.normalized_E : *c.normalized_S;
    os << l.k << ',' << l.r_k << ',' << c.M_k << ',' << es << ',' << c.normalized_M << ',' << nes << ','
       << l.margin_M << ',' << l.margin_ES << ',' << l.pass << '\n';
  }
  os.precision(old);
}

void write_cascade_json(std::ostream& os, const CascadeReport& r) {
  nlohmann::json j;
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["all_pass"] = r.all_pass;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) {
    const auto& c = l.cylinder;
    levels.push_back({{"k", l.k},
                      {"r_k", l.r_k},
                      {"mode", to_string(c.mode.kind)},
                      {"beta", c.beta},
                      {"T", c.T},
                      {"M_k", c.M_k},
                      {"ES_k", c.E_k ? *c.E_k : *c.S_k},
                      {"margin_M", l.margin_M},
                      {"margin_ES", l.margin_ES},
                      {"pass", l.pass}});
  }
  j["levels"] = levels;
  os << j.dump(2) << '\n';
}

void write_energy_balance_csv(std::ostream& os, const EnergyBalanceReport& r) {
  const auto old = os.precision(17);
  os << "t0,t1,lhs,dissipation,commutator,residual,tolerance,satisfied\n";
  for (const auto& iv : r.intervals) {
    os << iv.t0 << ',' << iv.t1 << ',' << iv.lhs << ',' << iv.dissipation << ',' << iv.commutator << ','
       << iv.residual << ',' << iv.tolerance << ',' << iv.satisfied << '\n';
  }
  os.precision(old);
}

void write_energy_balance_json(std::ostream& os, const EnergyBalanceReport& r) {
  nlohmann::json j;
  j["intervals"] = r.intervals.size();
  j["satisfied_fraction"] = r.satisfied_fraction;
  double worst = -kInf;
  for (const auto& iv : r.intervals) worst = std::max(worst, iv.residual - iv.tolerance);
  j["worst_excess"] = r.intervals.empty() ? 0.0 : worst;
  os << j.dump(2) << '\n';
}

}  // namespace tfe
