#include "tfe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "banded_lu.hpp"
#include "tfe/error.hpp"

namespace tfe {

namespace {

constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

double profile_scale(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m > 0.0 ? m : 1.0;
}

std::vector<char> frozen_nodes(std::span<const double> u_old, double floor) {
  const std::size_t n = u_old.size();
  std::vector<char> frozen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_dry = i == 0 || u_old[i - 1] <= floor;
    const bool right_dry = i + 1 == n || u_old[i + 1] <= floor;
    frozen[i] = u_old[i] <= floor && left_dry && right_dry;
  }
  return frozen;
}

bool face_active(std::size_t f, std::size_t n, const std::vector<char>& frozen) {
  return f >= 1 && f + 3 <= n && !frozen[f] && !frozen[f + 1];
}

FaceMobility mobility_at(double a, double b, const SolverConfig& cfg) {
  FaceMobility m = face_mobility_with_derivatives(std::max(a, 0.0), std::max(b, 0.0), cfg.n, cfg.mobility);
  if (a < 0.0) m.d_a = 0.0;
  if (b < 0.0) m.d_b = 0.0;
  return m;
}

double third_difference(std::span<const double> u, std::size_t f, double h3) {
  return (u[f + 2] - 3.0 * u[f + 1] + 3.0 * u[f] - u[f - 1]) / h3;
}

// Residual u - u_old + (dt/h) (J_{i+1/2} - J_{i-1/2}); optionally the
// banded Jacobian alongside.
void assemble(std::span<const double> u, std::span<const double> u_old, double dt, double h,
              const SolverConfig& cfg, const std::vector<char>& frozen, std::vector<double>& r,
              detail::BandedLU* jac, std::vector<double>* noise = nullptr,
              std::vector<double>* fluxes = nullptr) {
  const std::size_t n = u.size();
  const double c = dt / h;
  const double h3 = h * h * h;
  for (std::size_t i = 0; i < n; ++i) r[i] = u[i] - u_old[i];
  if (noise != nullptr) {
    for (std::size_t i = 0; i < n; ++i) (*noise)[i] = std::abs(u[i]) + std::abs(u_old[i]);
  }
  if (fluxes != nullptr) std::fill(fluxes->begin(), fluxes->end(), 0.0);
  if (jac != nullptr) {
    jac->clear();
    for (std::size_t i = 0; i < n; ++i) jac->at(i, i) = 1.0;
  }
  for (std::size_t f = 0; f + 1 < n; ++f) {
    if (!face_active(f, n, frozen)) continue;
    const double d3 = third_difference(u, f, h3);
    // Mobility and its derivatives with respect to u[f-1 .. f+2].
    double mob = 0.0;
    double dm[4] = {0.0, 0.0, 0.0, 0.0};
    if (cfg.mobility.kind == MobilityKind::upwind || cfg.mobility.kind == MobilityKind::upwind_limited) {
      const bool from_left = d3 >= 0.0;
      const std::size_t up = from_left ? f : f + 1;
      const std::size_t down = from_left ? f + 1 : f;
      const std::size_t behind = from_left ? f - 1 : f + 2;
      double s = u[up];
      double ds[3] = {1.0, 0.0, 0.0};  // d s / d(u_up, u_down, u_behind)
      if (cfg.mobility.kind == MobilityKind::upwind_limited) {
        // Linear reconstruction toward the face with a minmod slope.
        const double ahead = u[down] - u[up];
        const double back = u[up] - u[behind];
        if (ahead * back > 0.0) {
          if (std::abs(ahead) <= std::abs(back)) {
            s += 0.5 * ahead;
            ds[0] = 0.5;
            ds[1] = 0.5;
          } else {
            s += 0.5 * back;
            ds[0] = 1.5;
            ds[2] = -0.5;
          }
        }
      }
      if (s > 0.0) {
        mob = std::pow(s, cfg.n);
        const double dv = cfg.n * mob / s;
        dm[up - (f - 1)] += dv * ds[0];
        dm[down - (f - 1)] += dv * ds[1];
        dm[behind - (f - 1)] += dv * ds[2];
      }
    } else {
      const FaceMobility m = mobility_at(u[f], u[f + 1], cfg);
      mob = m.value;
      dm[1] = m.d_a;
      dm[2] = m.d_b;
    }
    const double flux = mob * d3;
    r[f] += c * flux;
    r[f + 1] -= c * flux;
    if (fluxes != nullptr) (*fluxes)[f] = flux;
    if (noise != nullptr) {
      // Round-off carried by c * flux: the third difference cancels terms
      // of size |u| / h^3.
      const double stencil = std::abs(u[f - 1]) + 3.0 * std::abs(u[f]) + 3.0 * std::abs(u[f + 1]) +
                             std::abs(u[f + 2]);
      const double err = c * mob * stencil / h3;
      (*noise)[f] += err;
      (*noise)[f + 1] += err;
    }
    if (jac == nullptr) continue;
    const double w = mob / h3;
    const double dj[4] = {-w + d3 * dm[0], 3.0 * w + d3 * dm[1], -3.0 * w + d3 * dm[2], w + d3 * dm[3]};
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t col = f - 1 + k;
      jac->at(f, col) += c * dj[k];
      jac->at(f + 1, col) -= c * dj[k];
    }
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Residual indistinguishable from the floating-point noise of its terms.
bool at_roundoff_floor(std::span<const double> r, std::span<const double> noise) {
  constexpr double kNoiseFactor = 16.0 * kMachineEps;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(r[i]) > kNoiseFactor * noise[i]) return false;
  }
  return true;
}

void check_boundary(std::span<const double> u, double threshold) {
  const std::size_t n = u.size();
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) {
    if (u[i] > threshold) {
      throw Error(ErrorKind::domain_exhausted,
                  "support reaches the domain boundary at node " + std::to_string(i));
    }
  }
}

}  // namespace

void SolverConfig::validate() const {
  const auto fail = [](const std::string& field, const std::string& rule) {
    throw Error(ErrorKind::config, "solver." + field + " " + rule);
  };
  if (!(n > 0.0 && n < 3.0)) fail("n", "must lie in (0,3)");
  if (!(dt_min > 0.0)) fail("dt_min", "must be > 0");
  if (!(dt_init >= dt_min)) fail("dt_init", "must be >= dt_min");
  if (!(dt_max >= dt_init)) fail("dt_max", "must be >= dt_init");
  if (!(newton_tol > 0.0)) fail("newton_tol", "must be > 0");
  if (newton_max_iter < 1) fail("newton_max_iter", "must be >= 1");
  if (!(mobility.eps >= 0.0)) fail("mobility_eps", "must be >= 0");
  if (!(support_threshold_rel > 0.0 && support_threshold_rel < 1.0)) {
    fail("support_threshold_rel", "must lie in (0,1)");
  }
  if (!(positivity_floor >= 0.0)) fail("positivity_floor", "must be >= 0");
  if (!(dt_shrink > 0.0 && dt_shrink < 1.0)) fail("dt_shrink", "must lie in (0,1)");
  if (!(dt_grow >= 1.0)) fail("dt_grow", "must be >= 1");
  if (easy_iters < 0) fail("easy_iters", "must be >= 0");
}

double support_threshold(const Profile& p, double theta_rel) { return theta_rel * p.max(); }

std::vector<double> face_fluxes(std::span<const double> u, double h, const SolverConfig& cfg) {
  const std::size_t n = u.size();
  const auto frozen = frozen_nodes(u, cfg.positivity_floor);
  std::vector<double> r(n);
  std::vector<double> flux(n - 1);
  assemble(u, u, 0.0, h, cfg, frozen, r, nullptr, nullptr, &flux);
  return flux;
}

std::vector<double> residual(const Profile& p_new, const Profile& p_old, double dt,
                             const SolverConfig& cfg) {
  if (!(p_new.grid() == p_old.grid())) {
    throw Error(ErrorKind::invalid_argument, "residual needs profiles on the same grid");
  }
  const auto frozen = frozen_nodes(p_old.values(), cfg.positivity_floor);
  std::vector<double> r(p_new.size());
  assemble(p_new.values(), p_old.values(), dt, p_old.grid().h, cfg, frozen, r, nullptr);
  const double scale = profile_scale(p_old.values());
  for (double& x : r) x /= scale;
  return r;
}

StepResult step(const Profile& p, double dt, const SolverConfig& cfg) {
  const std::size_t n = p.size();
  const auto u_old = p.values();
  const double h = p.grid().h;
  check_boundary(u_old, support_threshold(p, cfg.support_threshold_rel));

  StepResult out;
  out.stats.dt_used = dt;
  const double scale = profile_scale(u_old);
  const auto frozen = frozen_nodes(u_old, cfg.positivity_floor);
  const bool keep_positive = cfg.mobility.kind != MobilityKind::arithmetic_mean &&
                             cfg.mobility.kind != MobilityKind::regularized;

  std::vector<double> u(u_old.begin(), u_old.end());
  std::vector<double> r(n);
  std::vector<double> delta(n);
  detail::BandedLU jac(n, 2, 2);

  std::vector<double> noise(n);
  std::vector<double> fluxes(n - 1);
  bool converged = false;
  for (int it = 1; it <= cfg.newton_max_iter; ++it) {
    assemble(u, u_old, dt, h, cfg, frozen, r, &jac);
    if (!jac.factorize()) break;
    for (std::size_t i = 0; i < n; ++i) delta[i] = -r[i];
    jac.solve(delta);

    if (!std::isfinite(max_abs(delta))) break;
    // Projected update: iterates stay nonnegative when the scheme is meant
    // to preserve positivity. The accepted state is still checked below.
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += delta[i];
      if (keep_positive && u[i] < 0.0) u[i] = 0.0;
    }

    assemble(u, u_old, dt, h, cfg, frozen, r, nullptr, &noise, &fluxes);
    out.stats.newton_iters = it;
    out.stats.residual_final = max_abs(r) / scale;
    if (!std::isfinite(out.stats.residual_final)) break;
    if (out.stats.residual_final <= cfg.newton_tol || at_roundoff_floor(r, noise)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    out.status = StepStatus::newton_failed;
    return out;
  }

  // Conservative update from the converged face fluxes: mass changes only
  // by summation round-off.
  const double c = dt / h;
  for (std::size_t i = 0; i < n; ++i) {
    double v = u_old[i];
    if (i + 1 < n) v -= c * fluxes[i];
    if (i > 0) v += c * fluxes[i - 1];
    u[i] = v;
  }

  const double u_max = profile_scale(u);
  const double neg_bound = -10.0 * kMachineEps * u_max;
  for (double& v : u) {
    if (v < neg_bound) {
      out.status = StepStatus::positivity_violation;
      return out;
    }
    if (v < 0.0) v = 0.0;
  }
  out.profile = Profile(p.grid(), std::move(u));
  check_boundary(out.profile.values(), support_threshold(out.profile, cfg.support_threshold_rel));
  return out;
}

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::stopped: return "stopped";
    case RunStatus::run_failed: return "run_failed";
    case RunStatus::domain_exhausted: return "domain_exhausted";
  }
  return "unknown";
}

namespace {

Record make_record(double t, const Profile& p, const std::vector<Observer>& observers) {
  Record rec{t, p, {}};
  rec.scalars["mass"] = mass(p);
  rec.scalars["energy"] = dirichlet_energy(p);
  for (const Observer& o : observers) rec.scalars[o.name] = o.fn(t, p);
  return rec;
}

}  // namespace

TimeSeries run(const Profile& u0, const SolverConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  if (!(opt.t_end >= 0.0)) throw Error(ErrorKind::invalid_argument, "t_end must be >= 0");
  if (!(opt.observe_every >= 0.0)) throw Error(ErrorKind::invalid_argument, "observe_every must be >= 0");

  TimeSeries series;
  series.records.push_back(make_record(0.0, u0, opt.observers));
  if (opt.stop_when && opt.stop_when(series.records.back())) {
    series.status = RunStatus::stopped;
    return series;
  }
  if (opt.t_end == 0.0) return series;

  Profile current = u0;
  double t = 0.0;
  double dt = cfg.dt_init;
  int rejections = 0;
  std::uint64_t obs_index = 1;
  const bool every_step = opt.observe_every == 0.0;
  const auto next_target = [&]() {
    if (every_step) return opt.t_end;
    return std::min(static_cast<double>(obs_index) * opt.observe_every, opt.t_end);
  };

  while (t < opt.t_end) {
    const double target = next_target();
    const bool lands = dt >= target - t;
    const double dt_step = lands ? target - t : dt;
    StepResult res;
    try {
      res = step(current, dt_step, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::domain_exhausted) throw;
      series.status = RunStatus::domain_exhausted;
      series.failure = e.what();
      return series;
    }
    if (res.status != StepStatus::accepted) {
      ++series.rejected_steps;
      ++rejections;
      dt = dt_step * cfg.dt_shrink;
      if (dt < cfg.dt_min) {
        series.status = RunStatus::run_failed;
        series.failure = "time step fell below dt_min at t = " + std::to_string(t);
        return series;
      }
      continue;
    }
    res.stats.dt_rejections = rejections;
    rejections = 0;
    ++series.accepted_steps;
    const double t_new = lands ? target : t + dt_step;
    if (opt.on_step) opt.on_step(t_new, current, res.profile, res.stats);
    current = std::move(res.profile);
    t = t_new;
    if (res.stats.newton_iters <= cfg.easy_iters) dt = std::min(dt * cfg.dt_grow, cfg.dt_max);

    const bool halt = opt.stop_after_step && opt.stop_after_step(t, current);
    if (every_step || lands || halt) {
      if (lands && !every_step) ++obs_index;
      series.records.push_back(make_record(t, current, opt.observers));
      if (halt || (opt.stop_when && opt.stop_when(series.records.back()))) {
        series.status = RunStatus::stopped;
        return series;
      }
    }
  }
  return series;
}

TimeSeries run(const Profile& u0, const SolverConfig& cfg, double t_end, double observe_every,
               std::vector<Observer> observers) {
  RunOptions opt;
  opt.t_end = t_end;
  opt.observe_every = observe_every;
  opt.observers = std::move(observers);
  return run(u0, cfg, opt);
}

}  // namespace tfe
