#include "tfe/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"
#include "tfe/error.hpp"

namespace tfe {

namespace {

using nlohmann::json;

// Runs body(0..count-1) on up to `workers` threads; rethrows the first
// failure by index once all work is done.
template <class F>
void parallel_for(std::size_t count, int workers, F&& body) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < k; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Profile scaled(const Profile& p, double factor) {
  std::vector<double> u(p.values().begin(), p.values().end());
  for (double& v : u) v *= factor;
  return Profile(p.grid(), std::move(u));
}

bool usable(const SweepPoint& pt) {
  return !pt.estimate.censored && (pt.status == RunStatus::completed || pt.status == RunStatus::stopped);
}

json estimate_json(const WaitingTimeEstimate& e) {
  json j;
  j["t_star"] = e.censored ? json() : json(e.t_star);
  j["censored"] = e.censored;
  j["theta"] = e.theta_used;
  j["margin"] = e.margin_used;
  j["mode"] = to_string(e.mode);
  if (e.censored) {
    j["censored_at"] = e.t_last;
  } else {
    j["bracket"] = {e.t_prev, e.t_hit};
  }
  return j;
}

json fit_json(const std::optional<SlopeFit>& f) {
  if (!f) return json();
  return {{"slope", f->slope}, {"stderr", f->stderr_slope}, {"intercept", f->intercept}, {"points", f->points}};
}

json trend_json(const RefinementTrend& t) {
  json t_star = json::array();
  for (double v : t.t_star) t_star.push_back(std::isfinite(v) ? json(v) : json());
  return {{"h", t.h},
          {"t_star", t_star},
          {"slope", t.slope},
          {"finest_ratio", t.finest_ratio},
          {"class", to_string(t.motion)}};
}

json criterion_json(const CriterionReport& c) {
  return {{"kind", to_string(c.kind)}, {"supremum", c.supremum}, {"r_min", c.r_min()}, {"radii", c.radii},
          {"values", c.values}};
}

void write_point_csv(std::ostream& os, const SweepPoint& p) {
  os << p.n_nodes << ',';
  if (p.estimate.censored) {
    os << "inf,1,";
  } else {
    os << p.estimate.t_star << ",0,";
  }
  os << p.accepted_steps << ',' << to_string(p.status);
}

}  // namespace

// ---------------------------------------------------------------------------

double exact_source_n1(double x, double t, double a) {
  if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "exact source solution needs t > 0");
  if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "exact source solution needs a > 0");
  const double s = std::pow(t, -0.2);
  const double eta = x * s;
  const double w = a * a - eta * eta;
  return w > 0.0 ? s * w * w / 120.0 : 0.0;
}

Profile exact_source_profile(const Grid1D& grid, double t, double a) {
  std::vector<double> u(grid.n_nodes);
  for (std::size_t i = 0; i < grid.n_nodes; ++i) u[i] = exact_source_n1(grid.x(i), t, a);
  return Profile(grid, std::move(u));
}

ConvergenceReport convergence_study(const ConvergenceOptions& opt) {
  if (opt.grids.empty()) throw Error(ErrorKind::invalid_argument, "convergence study needs grids");
  if (!(opt.t1 >= opt.t0) || !(opt.t0 > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "need 0 < t0 <= t1");
  }
  if (!(opt.dt_factor > 0.0)) throw Error(ErrorKind::invalid_argument, "dt_factor must be > 0");
  ConvergenceReport rep;
  rep.options = opt;
  std::vector<std::size_t> grids = opt.grids;
  std::sort(grids.begin(), grids.end());
  rep.rows.resize(grids.size());

  parallel_for(grids.size(), opt.workers, [&](std::size_t k) {
    const Grid1D g = make_grid(opt.x_min, opt.x_max, grids[k]);
    const Profile u0 = exact_source_profile(g, opt.t0, opt.a);
    const double span = opt.t1 - opt.t0;
    const double dt_target = opt.dt_factor * g.h * g.h;
    const double steps = span > 0.0 ? std::ceil(span / dt_target) : 0.0;
    const double dt = span > 0.0 ? span / steps : dt_target;

    SolverConfig cfg;
    cfg.n = 1.0;
    cfg.mobility = opt.mobility;
    cfg.dt_init = dt;
    cfg.dt_max = dt;
    cfg.dt_min = dt * 1e-6;
    const TimeSeries s = run(u0, cfg, span, span);
    if (!s.ok()) {
      throw Error(ErrorKind::run_failed, "convergence run on " + std::to_string(grids[k]) + " nodes: " + s.failure);
    }
    const Profile& u = s.records.back().profile;
    ConvergenceRow row;
    row.n_nodes = grids[k];
    row.h = g.h;
    row.dt = dt;
    row.steps = s.accepted_steps;
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
      const double e = std::abs(u[i] - (span > 0.0 ? exact_source_n1(g.x(i), opt.t1, opt.a) : u0[i]));
      row.sup_error = std::max(row.sup_error, e);
      if (i + 1 < g.n_nodes) row.l1_error += 0.5 * g.h * e;
      if (i > 0) row.l1_error += 0.5 * g.h * e;
    }
    const double m0 = mass(u0);
    row.mass_drift = m0 > 0.0 ? std::abs(mass(u) - m0) / m0 : 0.0;
    row.final_profile = u;
    rep.rows[k] = row;
  });

  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto& c = rep.rows[k - 1];
    const auto& f = rep.rows[k];
    const double hr = std::log(c.h / f.h);
    const double ratio = f.l1_error > 0.0 ? c.l1_error / f.l1_error : std::numeric_limits<double>::infinity();
    rep.l1_ratios.push_back(ratio);
    rep.l1_orders.push_back(std::log(ratio) / hr);
    rep.sup_orders.push_back(f.sup_error > 0.0 ? std::log(c.sup_error / f.sup_error) / hr
                                               : std::numeric_limits<double>::infinity());
  }
  return rep;
}

// ---------------------------------------------------------------------------

SolverConfig waiting_time_solver(double n) {
  SolverConfig cfg;
  cfg.n = n;
  cfg.mobility.kind = MobilityKind::upwind;
  cfg.dt_init = 1e-12;
  cfg.dt_max = 1e-3;
  return cfg;
}

WaitingRunResult measure_waiting_time(const WaitingRun& spec) {
  if (spec.thetas.empty()) throw Error(ErrorKind::invalid_argument, "need at least one threshold");
  if (!(spec.t_max > 0.0)) throw Error(ErrorKind::invalid_argument, "t_max must be > 0");
  spec.solver.validate();
  const Grid1D& g = spec.u0.grid();
  const double margin = spec.margin > 0.0 ? spec.margin : 4.0 * g.h;

  std::vector<WaitingTimeDetector> detectors;
  detectors.reserve(spec.thetas.size());
  for (double theta : spec.thetas) detectors.emplace_back(spec.u0, spec.x0, theta, margin);

  WaitingRunResult out;
  const auto sample = [&](double t, const Profile& p) {
    const SupportInterval s = support_interval(p, spec.thetas.front());
    out.track.t.push_back(t);
    out.track.left.push_back(s.empty ? std::nan("") : s.left);
    out.track.right.push_back(s.empty ? std::nan("") : s.right);
  };
  const auto observe_all = [&](double t, const Profile& p) {
    bool all = true;
    for (auto& d : detectors) all = d.observe(t, p) && all;
    return all;
  };

  sample(0.0, spec.u0);
  if (!observe_all(0.0, spec.u0)) {
    RunOptions o;
    o.t_end = spec.t_max;
    o.observe_every = spec.t_max;
    o.stop_after_step = [&](double t, const Profile& p) {
      sample(t, p);
      return observe_all(t, p);
    };
    const TimeSeries s = run(spec.u0, spec.solver, o);
    out.status = s.status;
    out.failure = s.failure;
    out.accepted_steps = s.accepted_steps;
    out.rejected_steps = s.rejected_steps;
    const double m0 = mass(spec.u0);
    if (m0 > 0.0) out.mass_drift = std::abs(mass(s.records.back().profile) - m0) / m0;
  }
  for (const auto& d : detectors) out.estimates.push_back(d.estimate());
  return out;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::no_fit, "need at least two points");
  const std::size_t m = x.size();
  std::vector<double> lx(m);
  std::vector<double> ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorKind::no_fit, "log-log fit needs finite positive values");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::no_fit, "log-log fit needs distinct x values");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = m;
  if (m > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = ly[i] - (f.intercept + f.slope * lx[i]);
      ssr += e * e;
    }
    f.stderr_slope = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  }
  return f;
}

KappaSweepReport kappa_sweep(const Profile& shape, const KappaSweepOptions& opt) {
  if (opt.kappas.empty() || opt.thetas.empty()) {
    throw Error(ErrorKind::invalid_argument, "kappa sweep needs kappas and thresholds");
  }
  for (double k : opt.kappas) {
    if (!(k > 0.0)) throw Error(ErrorKind::invalid_argument, "kappas must be > 0");
  }
  std::vector<double> kappas = opt.kappas;
  std::sort(kappas.begin(), kappas.end());

  KappaSweepReport rep;
  rep.n = opt.n;
  const Grid1D& g = shape.grid();
  const auto radii = dyadic_radii(g, opt.radius);
  rep.shape_supremum = criterion_mass(shape, opt.x0, opt.n, radii, BallMode::full).supremum;
  if (!(rep.shape_supremum > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "shape has zero mass criterion at x0");
  }

  std::vector<WaitingRunResult> runs(kappas.size());
  parallel_for(kappas.size(), opt.workers, [&](std::size_t k) {
    WaitingRun spec;
    spec.u0 = scaled(shape, kappas[k] / rep.shape_supremum);
    spec.solver = opt.solver;
    spec.solver.n = opt.n;
    spec.x0 = opt.x0;
    spec.t_max = opt.t_max;
    spec.thetas = opt.thetas;
    spec.margin = opt.margin;
    if (opt.matched) {
      const double s = std::pow(kappas[k] / kappas.front(), -opt.n);
      spec.solver.dt_init *= s;
      spec.solver.dt_min *= s;
      spec.solver.dt_max *= s;
      spec.t_max *= s;
    }
    runs[k] = measure_waiting_time(spec);
  });

  for (std::size_t j = 0; j < opt.thetas.size(); ++j) {
    SweepResult res;
    res.parameter = "kappa";
    res.theta = opt.thetas[j];
    std::vector<double> xs;
    std::vector<double> ys;
    res.c_est = std::numeric_limits<double>::infinity();
    res.C_est = 0.0;
    for (std::size_t k = 0; k < kappas.size(); ++k) {
      SweepPoint pt;
      pt.value = kappas[k];
      pt.n_nodes = g.n_nodes;
      pt.estimate = runs[k].estimates[j];
      pt.accepted_steps = runs[k].accepted_steps;
      pt.status = runs[k].status;
      if (usable(pt)) {
        xs.push_back(pt.value);
        ys.push_back(pt.estimate.t_star);
        const double scaled_t = pt.estimate.t_star * std::pow(pt.value, opt.n);
        res.c_est = std::min(res.c_est, scaled_t);
        res.C_est = std::max(res.C_est, scaled_t);
      }
      res.points.push_back(pt);
    }
    if (xs.empty()) {
      if (j == 0) {
        throw Error(ErrorKind::no_fit, "every run is censored at t_max = " + std::to_string(opt.t_max) +
                                           "; raise t_max or check x0");
      }
      res.c_est = 0.0;
    }
    if (xs.size() >= 4) res.fit = fit_loglog(xs, ys);
    rep.by_theta.push_back(std::move(res));
  }
  for (auto& r : runs) rep.tracks.push_back(std::move(r.track));
  return rep;
}

std::string_view to_string(MotionClass c) noexcept {
  switch (c) {
    case MotionClass::waiting: return "waiting";
    case MotionClass::instantaneous: return "instantaneous";
    case MotionClass::inconclusive: return "inconclusive";
  }
  return "unknown";
}

RefinementTrend classify_refinement(const std::vector<double>& h, const std::vector<WaitingTimeEstimate>& est,
                                    const RefinementRule& rule) {
  if (h.size() != est.size() || h.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "refinement trend needs at least two levels");
  }
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (!(h[i] < h[i - 1])) throw Error(ErrorKind::invalid_argument, "levels must refine");
  }
  RefinementTrend tr;
  tr.h = h;
  std::size_t censored = 0;
  for (const auto& e : est) {
    tr.t_star.push_back(e.t_star);
    if (e.censored) ++censored;
  }
  if (censored == est.size()) {
    tr.finest_ratio = 1.0;
    tr.motion = MotionClass::waiting;
    return tr;
  }
  if (censored > 0) return tr;

  tr.slope = fit_loglog(h, tr.t_star).slope;
  const std::size_t m = tr.t_star.size();
  tr.finest_ratio = tr.t_star[m - 1] / tr.t_star[m - 2];
  bool decreasing = true;
  for (std::size_t i = 1; i < m; ++i) decreasing = decreasing && tr.t_star[i] < tr.t_star[i - 1];
  if (decreasing && tr.slope >= rule.instantaneous_slope) {
    tr.motion = MotionClass::instantaneous;
  } else if (tr.slope <= rule.waiting_slope && tr.finest_ratio >= rule.waiting_ratio) {
    tr.motion = MotionClass::waiting;
  }
  return tr;
}

BetaSweepReport beta_sweep(const BetaSweepOptions& opt) {
  if (!(opt.n > 2.0 && opt.n < 3.0)) throw Error(ErrorKind::unsupported_range, "beta sweep needs n in (2,3)");
  if (opt.grids.size() < 2) throw Error(ErrorKind::invalid_argument, "beta sweep needs at least two grids");
  if (opt.thetas.empty()) throw Error(ErrorKind::invalid_argument, "beta sweep needs thresholds");
  std::vector<double> betas = opt.betas;
  if (betas.empty()) betas = {4.0 / opt.n - 0.3, 4.0 / opt.n + 0.3};
  std::sort(betas.begin(), betas.end());
  std::vector<std::size_t> grids = opt.grids;
  std::sort(grids.begin(), grids.end());

  const std::size_t per_beta = grids.size();
  std::vector<WaitingRunResult> runs(betas.size() * per_beta);
  std::vector<double> hs(per_beta);
  for (std::size_t k = 0; k < per_beta; ++k) hs[k] = make_grid(opt.x_min, opt.x_max, grids[k]).h;

  parallel_for(runs.size(), opt.workers, [&](std::size_t idx) {
    const Grid1D g = make_grid(opt.x_min, opt.x_max, grids[idx % per_beta]);
    WaitingRun spec;
    spec.u0 = power_law(g, opt.x0, betas[idx / per_beta], 1.0, opt.width);
    spec.solver = opt.solver;
    spec.solver.n = opt.n;
    spec.x0 = opt.x0;
    spec.t_max = opt.t_max;
    spec.thetas = opt.thetas;
    spec.margin = opt.margin_cells * g.h;
    runs[idx] = measure_waiting_time(spec);
  });

  BetaSweepReport rep;
  rep.n = opt.n;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    for (std::size_t k = 0; k < per_beta; ++k) {
      const auto& r = runs[b * per_beta + k];
      SweepPoint pt;
      pt.value = betas[b];
      pt.n_nodes = grids[k];
      pt.estimate = r.estimates.front();
      pt.accepted_steps = r.accepted_steps;
      pt.status = r.status;
      rep.points.push_back(pt);
    }
    for (std::size_t j = 0; j < opt.thetas.size(); ++j) {
      std::vector<WaitingTimeEstimate> est;
      for (std::size_t k = 0; k < per_beta; ++k) est.push_back(runs[b * per_beta + k].estimates[j]);
      rep.classes.push_back({betas[b], opt.thetas[j], classify_refinement(hs, est, opt.rule)});
    }
  }
  for (auto& r : runs) rep.tracks.push_back(std::move(r.track));
  return rep;
}

CounterexampleReport counterexample_study(const CounterexampleOptions& opt) {
  if (!(opt.n > 2.0 && opt.n < 3.0)) {
    throw Error(ErrorKind::unsupported_range, "counterexample study needs n in (2,3)");
  }
  if (opt.grids.size() < 2 || opt.k_max.empty()) {
    throw Error(ErrorKind::invalid_argument, "counterexample study needs two grids and k_max levels");
  }
  std::vector<std::size_t> grids = opt.grids;
  std::sort(grids.begin(), grids.end());
  std::vector<int> k_levels = opt.k_max;
  std::sort(k_levels.begin(), k_levels.end());
  const double beta = 4.0 / opt.n;

  CounterexampleReport rep;
  auto& osc = rep.oscillatory;
  auto& conc = rep.concentrated;
  conc.delta = opt.delta_fraction * beta;

  // Criteria for the oscillatory data on the finest grid.
  {
    const Grid1D g = make_grid(opt.x_min, opt.x_max, grids.back());
    const auto radii = dyadic_radii(g, opt.radius);
    const Profile u = oscillatory(g, opt.x0, opt.n, opt.width);
    const Profile base = power_law(g, opt.x0, beta, 1.0, opt.width);
    osc.mass = criterion_mass(u, opt.x0, opt.n, radii, BallMode::full);
    osc.energy = criterion_energy(u, opt.x0, opt.n, radii, BallMode::full);
    osc.baseline_mass = criterion_mass(base, opt.x0, opt.n, radii, BallMode::full);
    osc.mass_ratio_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double ratio = osc.mass.values[j] / osc.baseline_mass.values[j];
      osc.mass_ratio_min = std::min(osc.mass_ratio_min, ratio);
      osc.mass_ratio_max = std::max(osc.mass_ratio_max, ratio);
    }
    const double pi = std::acos(-1.0);
    std::size_t resolved = 0;
    while (resolved < radii.size() && 2.0 * pi * radii[resolved] * radii[resolved] >= opt.oscillation_cells * g.h) {
      ++resolved;
    }
    osc.energy_resolved_radii = resolved;
    osc.energy_growing = resolved >= 3;
    for (std::size_t j = 0; j + 2 < resolved; ++j) {
      osc.energy_growing = osc.energy_growing && osc.energy.values[j + 2] > osc.energy.values[j];
    }
  }

  // The concentrated data use the coarsest grid resolving every bump.
  const double h_needed = 0.5 / (static_cast<double>(k_levels.back()) * k_levels.back());
  conc.n_nodes = 0;
  for (std::size_t N : grids) {
    if (make_grid(opt.x_min, opt.x_max, N).h <= h_needed) {
      conc.n_nodes = N;
      break;
    }
  }
  if (conc.n_nodes == 0) {
    throw Error(ErrorKind::under_resolved, "no grid resolves the bumps of k_max = " + std::to_string(k_levels.back()));
  }

  // Waiting times: oscillatory on every grid, concentrated per k_max.
  const std::size_t n_osc = grids.size();
  std::vector<WaitingRunResult> runs(n_osc + k_levels.size());
  std::vector<Profile> conc_data(k_levels.size());
  const Grid1D gc = make_grid(opt.x_min, opt.x_max, conc.n_nodes);
  for (std::size_t k = 0; k < k_levels.size(); ++k) {
    conc_data[k] = concentrated(gc, opt.x0, opt.n, conc.delta, k_levels[k], opt.width);
  }
  parallel_for(runs.size(), opt.workers, [&](std::size_t idx) {
    WaitingRun spec;
    if (idx < n_osc) {
      spec.u0 = oscillatory(make_grid(opt.x_min, opt.x_max, grids[idx]), opt.x0, opt.n, opt.width);
    } else {
      spec.u0 = conc_data[idx - n_osc];
    }
    spec.solver = opt.solver;
    spec.solver.n = opt.n;
    spec.x0 = opt.x0;
    spec.t_max = opt.t_max;
    spec.thetas = opt.thetas;
    runs[idx] = measure_waiting_time(spec);
  });

  const auto point_of = [](const WaitingRunResult& r, double value, std::size_t nodes) {
    SweepPoint pt;
    pt.value = value;
    pt.n_nodes = nodes;
    pt.estimate = r.estimates.front();
    pt.accepted_steps = r.accepted_steps;
    pt.status = r.status;
    return pt;
  };
  std::vector<double> hs;
  std::vector<WaitingTimeEstimate> est;
  for (std::size_t k = 0; k < n_osc; ++k) {
    osc.waiting.push_back(point_of(runs[k], static_cast<double>(grids[k]), grids[k]));
    hs.push_back(make_grid(opt.x_min, opt.x_max, grids[k]).h);
    est.push_back(runs[k].estimates.front());
  }
  osc.trend = classify_refinement(hs, est, opt.rule);

  const auto radii = dyadic_radii(gc, opt.radius);
  conc.mass_increasing = true;
  conc.t_star_decreasing = true;
  for (std::size_t k = 0; k < k_levels.size(); ++k) {
    ConcentratedLevel lvl;
    lvl.k_max = k_levels[k];
    lvl.mass = criterion_mass(conc_data[k], opt.x0, opt.n, radii, BallMode::full);
    lvl.pnorm = criterion_pnorm(conc_data[k], opt.x0, opt.n, opt.p_exp, radii, BallMode::full);
    lvl.waiting = point_of(runs[n_osc + k], static_cast<double>(k_levels[k]), conc.n_nodes);
    if (!usable(lvl.waiting)) conc.t_star_decreasing = false;
    if (k > 0) {
      const auto& prev = conc.levels.back();
      conc.mass_increasing = conc.mass_increasing && lvl.mass.supremum > prev.mass.supremum;
      conc.t_star_decreasing =
          conc.t_star_decreasing && lvl.waiting.estimate.t_star < prev.waiting.estimate.t_star;
    }
    conc.levels.push_back(std::move(lvl));
  }
  return rep;
}

namespace {

struct CorpusMember {
  double amplitude;
  double curvature;
  double eps[3];
  double phase[3];
};

Profile corpus_profile(const Grid1D& g, const CorpusMember& m) {
  const double pi = std::acos(-1.0);
  std::vector<double> u(g.n_nodes);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double x = g.x(i);
    double v = m.amplitude * (1.0 - m.curvature * x * x);
    for (int k = 0; k < 3; ++k) v += m.eps[k] * std::sin((k + 1) * pi * x + m.phase[k]);
    u[i] = std::max(v, 0.0);
  }
  return Profile(g, std::move(u));
}

}  // namespace

InequalityReport inequality_study(const InequalityOptions& opt) {
  if (opt.corpus_size == 0) throw Error(ErrorKind::invalid_argument, "corpus must not be empty");
  InequalityReport rep;
  rep.gns_theta_reference = gns_theta(1, 1, 2.0, 6.0, 2.0);

  // Amplitude in [0.5, 2], curvature in [0.5, 1.5], perturbations up to 5%
  // of the amplitude: at |x| <= 0.6 the parabola is at least 0.46 A and the
  // perturbations at most 0.15 A.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CorpusMember> corpus(opt.corpus_size);
  for (auto& m : corpus) {
    m.amplitude = 0.5 + 1.5 * unit(rng);
    m.curvature = 0.5 + unit(rng);
    for (int k = 0; k < 3; ++k) {
      m.eps[k] = (unit(rng) - 0.5) * 0.1 * m.amplitude;
      m.phase[k] = 2.0 * std::acos(-1.0) * unit(rng);
    }
  }
  const Cutoff cutoff = Cutoff::plateau(0.0, opt.cutoff_inner, opt.cutoff_outer);
  const Grid1D coarse = make_grid(-1.0, 1.0, opt.n_nodes);
  const Grid1D fine = make_grid(-1.0, 1.0, 2 * opt.n_nodes - 1);
  for (const auto& m : corpus) {
    const Profile pc = corpus_profile(coarse, m);
    const Profile pf = corpus_profile(fine, m);
    rep.bernis_gruen_max = std::max(rep.bernis_gruen_max, bernis_gruen_check(pc, cutoff, opt.n).ratio);
    rep.bernis_gruen_max_refined = std::max(rep.bernis_gruen_max_refined, bernis_gruen_check(pf, cutoff, opt.n).ratio);
    const double a = -opt.cutoff_outer;
    const double b = opt.cutoff_outer;
    rep.gns_max = std::max(rep.gns_max, gns_check(pc, opt.gns_k, opt.gns_p, opt.gns_q, opt.gns_r, a, b).ratio);
    rep.gns_max_refined =
        std::max(rep.gns_max_refined, gns_check(pf, opt.gns_k, opt.gns_p, opt.gns_q, opt.gns_r, a, b).ratio);
  }
  rep.bernis_gruen_drift = std::abs(rep.bernis_gruen_max_refined / rep.bernis_gruen_max - 1.0);
  rep.gns_drift = std::abs(rep.gns_max_refined / rep.gns_max - 1.0);

  // Spreading drop of height 1 on [-0.3, 0.3], recorded after every step.
  const Grid1D g = make_grid(-1.0, 1.0, opt.balance_nodes);
  std::vector<double> u(g.n_nodes);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double w = 1.0 - g.x(i) * g.x(i) / 0.09;
    u[i] = w > 0.0 ? w * w : 0.0;
  }
  SolverConfig cfg = waiting_time_solver(opt.n);
  cfg.dt_init = 1e-10;
  const TimeSeries s = run(Profile(g, std::move(u)), cfg, opt.balance_t_end, 0.0);
  if (!s.ok()) throw Error(ErrorKind::run_failed, "energy-balance run: " + s.failure);
  EnergyBalanceOptions eo;
  eo.n = opt.n;
  eo.mobility = cfg.mobility;
  rep.balance = energy_balance_monitor(s, cutoff, eo);
  return rep;
}

// ---------------------------------------------------------------------------

void write_track_csv(std::ostream& os, const InterfaceTrack& track) {
  const auto old = os.precision(17);
  os << "t,left,right\n";
  for (std::size_t i = 0; i < track.t.size(); ++i) {
    os << track.t[i] << ',';
    if (std::isnan(track.left[i])) {
      os << "nan,nan\n";
    } else {
      os << track.left[i] << ',' << track.right[i] << '\n';
    }
  }
  os.precision(old);
}

void write_convergence_summary_csv(std::ostream& os, const ConvergenceReport& r) {
  const auto old = os.precision(17);
  os << "n_nodes,h,dt,steps,l1_error,sup_error,mass_drift\n";
  for (const auto& row : r.rows) {
    os << row.n_nodes << ',' << row.h << ',' << row.dt << ',' << row.steps << ',' << row.l1_error << ','
       << row.sup_error << ',' << row.mass_drift << '\n';
  }
  os.precision(old);
}

void write_convergence_summary_json(std::ostream& os, const ConvergenceReport& r) {
  json j;
  j["study"] = "convergence";
  j["a"] = r.options.a;
  j["t0"] = r.options.t0;
  j["t1"] = r.options.t1;
  j["mobility"] = to_string(r.options.mobility.kind);
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n_nodes", row.n_nodes},
                    {"h", row.h},
                    {"dt", row.dt},
                    {"steps", row.steps},
                    {"l1_error", row.l1_error},
                    {"sup_error", row.sup_error},
                    {"mass_drift", row.mass_drift}});
  }
  j["rows"] = rows;
  j["l1_ratios"] = r.l1_ratios;
  j["l1_orders"] = r.l1_orders;
  j["sup_orders"] = r.sup_orders;
  os << j.dump(2) << '\n';
}

void write_kappa_summary_csv(std::ostream& os, const KappaSweepReport& r) {
  const auto old = os.precision(17);
  os << "theta,kappa,n_nodes,t_star,censored,steps,status,scaled_t_star\n";
  for (const auto& res : r.by_theta) {
    for (const auto& p : res.points) {
      os << res.theta << ',' << p.value << ',';
      write_point_csv(os, p);
      os << ',';
      if (p.estimate.censored) {
        os << "inf\n";
      } else {
        os << p.estimate.t_star * std::pow(p.value, r.n) << '\n';
      }
    }
  }
  os.precision(old);
}

void write_kappa_summary_json(std::ostream& os, const KappaSweepReport& r) {
  json j;
  j["study"] = "kappa_sweep";
  j["n"] = r.n;
  j["shape_supremum"] = r.shape_supremum;
  json results = json::array();
  for (const auto& res : r.by_theta) {
    json pts = json::array();
    for (const auto& p : res.points) {
      json e = estimate_json(p.estimate);
      e["kappa"] = p.value;
      e["steps"] = p.accepted_steps;
      e["status"] = to_string(p.status);
      pts.push_back(e);
    }
    results.push_back({{"theta", res.theta},
                       {"fit", fit_json(res.fit)},
                       {"c_est", res.c_est},
                       {"C_est", res.C_est},
                       {"spread", res.c_est > 0.0 ? json(res.C_est / res.c_est) : json()},
                       {"points", pts}});
  }
  j["results"] = results;
  os << j.dump(2) << '\n';
}

void write_beta_summary_csv(std::ostream& os, const BetaSweepReport& r) {
  const auto old = os.precision(17);
  os << "beta,n_nodes,t_star,censored,steps,status\n";
  for (const auto& p : r.points) {
    os << p.value << ',';
    write_point_csv(os, p);
    os << '\n';
  }
  os.precision(old);
}

void write_beta_summary_json(std::ostream& os, const BetaSweepReport& r) {
  json j;
  j["study"] = "beta_sweep";
  j["n"] = r.n;
  json classes = json::array();
  for (const auto& c : r.classes) {
    json t = trend_json(c.trend);
    t["beta"] = c.beta;
    t["theta"] = c.theta;
    classes.push_back(t);
  }
  j["classes"] = classes;
  os << j.dump(2) << '\n';
}

void write_counterexample_summary_csv(std::ostream& os, const CounterexampleReport& r) {
  const auto old = os.precision(17);
  os << "family,parameter,n_nodes,t_star,censored,steps,status,mass_supremum,other_supremum\n";
  for (const auto& p : r.oscillatory.waiting) {
    os << "oscillatory," << p.value << ',';
    write_point_csv(os, p);
    os << ',' << r.oscillatory.mass.supremum << ',' << r.oscillatory.energy.supremum << '\n';
  }
  for (const auto& l : r.concentrated.levels) {
    os << "concentrated," << l.k_max << ',';
    write_point_csv(os, l.waiting);
    os << ',' << l.mass.supremum << ',' << l.pnorm.supremum << '\n';
  }
  os.precision(old);
}

void write_counterexample_summary_json(std::ostream& os, const CounterexampleReport& r) {
  json j;
  j["study"] = "counterexample";
  const auto& o = r.oscillatory;
  json waits = json::array();
  for (const auto& p : o.waiting) {
    json e = estimate_json(p.estimate);
    e["n_nodes"] = p.n_nodes;
    waits.push_back(e);
  }
  j["oscillatory"] = {{"mass", criterion_json(o.mass)},
                      {"energy", criterion_json(o.energy)},
                      {"baseline_mass", criterion_json(o.baseline_mass)},
                      {"mass_ratio_min", o.mass_ratio_min},
                      {"mass_ratio_max", o.mass_ratio_max},
                      {"energy_growing", o.energy_growing},
                      {"energy_resolved_radii", o.energy_resolved_radii},
                      {"waiting", waits},
                      {"trend", trend_json(o.trend)}};
  const auto& c = r.concentrated;
  json levels = json::array();
  for (const auto& l : c.levels) {
    json e = estimate_json(l.waiting.estimate);
    levels.push_back({{"k_max", l.k_max},
                      {"mass", criterion_json(l.mass)},
                      {"pnorm", criterion_json(l.pnorm)},
                      {"waiting", e}});
  }
  j["concentrated"] = {{"delta", c.delta},
                       {"n_nodes", c.n_nodes},
                       {"levels", levels},
                       {"mass_increasing", c.mass_increasing},
                       {"t_star_decreasing", c.t_star_decreasing}};
  os << j.dump(2) << '\n';
}

}  // namespace tfe

namespace tfe {

void write_inequality_summary_csv(std::ostream& os, const InequalityReport& r) {
  const auto old = os.precision(17);
  os << "check,coarse,refined,drift\n";
  os << "bernis_gruen_max_ratio," << r.bernis_gruen_max << ',' << r.bernis_gruen_max_refined << ','
     << r.bernis_gruen_drift << '\n';
  os << "gns_max_ratio," << r.gns_max << ',' << r.gns_max_refined << ',' << r.gns_drift << '\n';
  os.precision(old);
}

void write_inequality_summary_json(std::ostream& os, const InequalityReport& r) {
  json j;
  j["study"] = "inequalities";
  j["gns_theta_reference"] = r.gns_theta_reference;
  j["bernis_gruen"] = {{"max_ratio", r.bernis_gruen_max},
                       {"max_ratio_refined", r.bernis_gruen_max_refined},
                       {"drift", r.bernis_gruen_drift}};
  j["gns"] = {{"max_ratio", r.gns_max}, {"max_ratio_refined", r.gns_max_refined}, {"drift", r.gns_drift}};
  j["energy_balance"] = {{"intervals", r.balance.intervals.size()},
                         {"satisfied_fraction", r.balance.satisfied_fraction}};
  os << j.dump(2) << '\n';
}

}  // namespace tfe
