// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "source_oracle.hpp"
#include "tfe/diagnostics.hpp"
#include "tfe/experiments.hpp"

namespace {

using tfe::MobilityKind;
using tfe::MotionClass;
using tfe::Profile;

constexpr double kInf = std::numeric_limits<double>::infinity();

int workers() { return static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u)); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Profile drop(const tfe::Grid1D& g, double x0, double amplitude, double width) {
  std::vector<double> u(g.n_nodes, 0.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double s = (g.x(i) - x0) / width;
    if (std::abs(s) < 1.0) u[i] = amplitude * (1.0 - s * s) * (1.0 - s * s);
  }
  return Profile(g, std::move(u));
}

Profile parabola(const tfe::Grid1D& g, double height, double half_width) {
  std::vector<double> u(g.n_nodes, 0.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double s = g.x(i) / half_width;
    if (s * s < 1.0) u[i] = height * (1.0 - s * s);
  }
  return Profile(g, std::move(u));
}

tfe::SolverConfig spreading_solver(double n) {
  tfe::SolverConfig c;
  c.n = n;
  c.mobility.kind = MobilityKind::upwind;
  return c;
}

// 1. Relative mass drift over long runs at N = 512. The entropy mean is left
// out below n = 2, where Newton stalls at the contact line and the run crawls.
void mass_conservation(Outcome& o) {
  const auto g = tfe::make_grid(-1.0, 1.0, 512);
  double worst = 0.0;
  int runs = 0;
  std::uint64_t fewest = std::numeric_limits<std::uint64_t>::max();
  for (double n : {1.5, 2.5, 2.95}) {
    for (auto kind : {MobilityKind::entropy_consistent, MobilityKind::upwind, MobilityKind::upwind_limited}) {
      if (kind == MobilityKind::entropy_consistent && n < 2.0) continue;
      ++runs;
      tfe::SolverConfig c;
      c.n = n;
      c.mobility.kind = kind;
      c.dt_max = 1e-5;
      const auto u0 = drop(g, 0.0, 1.0, 0.3);
      const double m0 = tfe::mass(u0);
      const auto s = tfe::run(u0, c, 0.02, 0.0);
      o.require(s.ok(), "run failed: " + s.failure);
      for (const auto& r : s.records) worst = std::max(worst, std::abs(tfe::mass(r.profile) - m0) / m0);
      fewest = std::min(fewest, s.accepted_steps);
    }
  }
  o.detail << "max drift " << worst << " over " << runs << " runs, >= " << fewest << " steps each";
  o.require(worst <= 1e-10, "drift <= 1e-10");
  o.require(fewest >= 1000, ">= 1000 steps");
}

// 2. Energy across accepted steps of spreading parabolas.
void energy_dissipation(Outcome& o) {
  const auto g = tfe::make_grid(-1.0, 1.0, 401);
  int violations = 0;
  std::size_t steps = 0;
  double largest = -kInf;
  for (double n : {1.5, 2.5, 2.95}) {
    auto c = spreading_solver(n);
    const auto s = tfe::run(parabola(g, 1.0, 0.3), c, 5e-3, 0.0);
    o.require(s.ok(), "run failed: " + s.failure);
    for (std::size_t k = 1; k < s.records.size(); ++k) {
      const double dt = s.records[k].t - s.records[k - 1].t;
      const double rise = tfe::dirichlet_energy(s.records[k].profile) - tfe::dirichlet_energy(s.records[k - 1].profile);
      largest = std::max(largest, rise / (c.newton_tol * dt));
      if (rise > 10.0 * c.newton_tol * dt) ++violations;
      ++steps;
    }
  }
  o.detail << violations << " violations in " << steps << " steps; largest change " << largest
           << " newton_tol*dt";
  o.require(violations == 0, "energy nonincreasing within 10 newton_tol dt");
}

// 3. Substitution oracle, then L1 convergence ratios.
void exact_convergence(Outcome& o) {
  double residual = 0.0;
  const long double a = 2.0L;
  for (long double t : {0.01L, 0.015L, 0.02L}) {
    const long double edge = a * std::pow(t, 0.2L);
    for (int j = -18; j <= 18; ++j) {
      residual = std::max(residual, static_cast<double>(std::abs(tfe_test::source_residual(0.05L * j * edge, t, a))));
    }
  }
  o.detail << "oracle residual " << residual;
  o.require(residual < 1e-8, "oracle residual < 1e-8");
  if (!o.pass) return;

  tfe::ConvergenceOptions opt;
  opt.grids = {129, 257, 513, 1025};
  opt.workers = workers();
  const auto r = tfe::convergence_study(opt);
  o.detail << "; L1 ratios";
  for (double q : r.l1_ratios) {
    o.detail << ' ' << q;
    o.require(q >= 3.0 && q <= 5.0, "ratio in [3,5]");
  }
}

// 4. t* against kappa for kappa (x - x0)_+^{4/n}, three thresholds.
void waiting_time_scaling(Outcome& o) {
  const double n = 2.5;
  const auto g = tfe::make_grid(-1.0, 2.0, 1024);
  const auto shape = tfe::power_law(g, 0.0, 4.0 / n, 1.0, 1.0);
  tfe::KappaSweepOptions opt;
  opt.n = n;
  opt.kappas = {1.0, 2.0, 4.0, 10.0};
  opt.thetas = {1e-7, 1e-6, 1e-8};
  opt.solver = spreading_solver(n);
  opt.solver.dt_init = 1e-12;
  opt.workers = workers();
  const auto r = tfe::kappa_sweep(shape, opt);
  for (const auto& s : r.by_theta) {
    const double slope = s.fit ? s.fit->slope : std::nan("");
    const double spread = s.c_est > 0.0 ? s.C_est / s.c_est : kInf;
    o.detail << "theta " << s.theta << ": slope " << slope << ", spread " << spread << "; ";
    o.require(std::abs(slope + n) <= 0.15, "slope -2.5 +/- 0.15");
    o.require(spread <= 5.0, "spread <= 5");
  }
}

// 5. Steeper than critical moves at once, flatter waits, per threshold.
void criticality(Outcome& o) {
  tfe::BetaSweepOptions opt;
  opt.n = 2.5;
  opt.betas = {4.0 / opt.n - 0.3, 4.0 / opt.n + 0.3};
  opt.solver = spreading_solver(opt.n);
  opt.solver.dt_init = 1e-12;
  opt.solver.dt_max = 1e-3;
  opt.workers = workers();
  const auto r = tfe::beta_sweep(opt);
  for (const auto& c : r.classes) {
    const auto want = c.beta < 4.0 / opt.n ? MotionClass::instantaneous : MotionClass::waiting;
    o.detail << "beta " << c.beta << " theta " << c.theta << ": " << tfe::to_string(c.trend.motion) << " (slope "
             << c.trend.slope << "); ";
    o.require(c.trend.motion == want, "beta " + std::to_string(c.beta) + " " + std::string(tfe::to_string(want)));
  }
}

// 6. Weighted entropy at a point ahead of a spreading drop.
void monotonicity(Outcome& o) {
  const auto g = tfe::make_grid(-1.0, 1.0, 401);
  const struct {
    double n, alpha, gamma;
  } cases[] = {{2.5, -0.775, -2.0}, {2.95, -0.975, -1.1}};
  for (const auto& c : cases) {
    const auto p = tfe::monotonicity_params(c.n);
    o.require(std::abs(p.alpha - c.alpha) < 1e-12 && p.gamma == c.gamma, "exponents");
    auto cfg = spreading_solver(c.n);
    cfg.dt_init = 1e-10;
    const auto s = tfe::run(drop(g, 0.0, 1.0, 0.3), cfg, 0.05, 0.0);
    o.require(s.ok(), "run failed: " + s.failure);
    const auto rep = tfe::monotonicity_monitor(s, 0.6, c.n);
    o.detail << "n " << c.n << " (alpha " << p.alpha << ", gamma " << p.gamma << "): " << rep.entries.size()
             << " records, " << rep.violations << " violations"
             << (rep.hypothesis_lost_at ? ", hypothesis lost" : "") << "; ";
    o.require(rep.entries.size() > 100, "monitored records");
    o.require(rep.violations == 0, "nondecreasing");
  }
}

// 7. Oscillatory and concentrated data.
void counterexamples(Outcome& o) {
  tfe::CounterexampleOptions opt;
  opt.solver = spreading_solver(opt.n);
  opt.solver.dt_init = 1e-12;
  opt.solver.dt_max = 1e-3;
  opt.workers = workers();
  const auto r = tfe::counterexample_study(opt);
  const auto& osc = r.oscillatory;
  o.detail << "mass ratio [" << osc.mass_ratio_min << ", " << osc.mass_ratio_max << "], energy growing "
           << osc.energy_growing << " over " << osc.energy_resolved_radii << " radii, t*";
  for (double t : osc.trend.t_star) o.detail << ' ' << t;
  o.detail << " (" << tfe::to_string(osc.trend.motion) << "); concentrated sup";
  for (const auto& l : r.concentrated.levels) o.detail << ' ' << l.mass.supremum;
  o.detail << ", t*";
  for (const auto& l : r.concentrated.levels) o.detail << ' ' << l.waiting.estimate.t_star;
  o.require(osc.mass_ratio_min >= 1.0 && osc.mass_ratio_max <= 3.0, "mass within [1x, 3x] of baseline");
  o.require(osc.energy_growing, "energy growing toward small r");
  const bool positive = std::all_of(osc.trend.t_star.begin(), osc.trend.t_star.end(), [](double t) { return t > 0.0; });
  o.require(positive && osc.trend.motion == MotionClass::waiting, "positive refinement-stable t*");
  o.require(r.concentrated.mass_increasing, "supremum increasing in k_max");
  o.require(r.concentrated.t_star_decreasing, "t* decreasing in k_max");
}

// 8. Cascade margins under (u, T) -> (lambda u, lambda^-n T) with matched runs.
void cascade_covariance(Outcome& o) {
  const double n = 2.5, lambda = 2.0, T = 0.01;
  const double s = std::pow(lambda, -n);
  const auto g = tfe::make_grid(-1.0, 1.0, 401);
  const auto u0 = drop(g, 0.0, 1.0, 0.3);
  auto a = spreading_solver(n);
  a.dt_init = 1e-10;
  a.dt_max = 1e-4;
  auto b = a;
  b.dt_init *= s;
  b.dt_min *= s;
  b.dt_max *= s;
  const auto ra = tfe::run(u0, a, T, T / 100);
  const auto rb = tfe::run(u0.scaled(lambda), b, T * s, T * s / 100);
  o.require(ra.ok() && rb.ok(), "runs");
  if (!o.pass) return;
  double drift = 0.0;
  for (auto kind : {tfe::SlippageMode::weak, tfe::SlippageMode::strong}) {
    const auto d = tfe::cascade_defaults(kind, n);
    const tfe::CylinderMode mode{kind, d.alpha};
    const auto ca = tfe::degeneracy_cascade(ra, 0.3, 0.2, 3, T, d.beta, 1.0, d.delta, n, mode);
    const auto cb = tfe::degeneracy_cascade(rb, 0.3, 0.2, 3, T * s, d.beta, 1.0, d.delta, n, mode);
    for (std::size_t k = 0; k < ca.levels.size(); ++k) {
      o.require(ca.levels[k].margin_M > 0.0 && ca.levels[k].margin_ES > 0.0, "nonzero margins");
      drift = std::max(drift, std::abs(cb.levels[k].margin_M / ca.levels[k].margin_M - 1.0));
      drift = std::max(drift, std::abs(cb.levels[k].margin_ES / ca.levels[k].margin_ES - 1.0));
    }
  }
  o.detail << "max margin drift " << drift << " over weak and strong, k = 1..3";
  o.require(drift <= 0.02, "drift <= 2%");
}

// 9. Interpolation inequalities and the localized energy balance.
void inequalities(Outcome& o) {
  const auto r = tfe::inequality_study({});
  o.detail << "theta " << r.gns_theta_reference << ", Bernis-Gruen max " << r.bernis_gruen_max << " -> "
           << r.bernis_gruen_max_refined << " (drift " << r.bernis_gruen_drift << "), balance "
           << r.balance.satisfied_fraction << " of " << r.balance.intervals.size() << " intervals";
  o.require(tfe::gns_theta(1, 1, 2.0, 6.0, 2.0) == 1.0 / 3.0, "theta == 1/3");
  o.require(r.bernis_gruen_drift <= 0.1, "drift <= 10%");
  o.require(r.balance.satisfied_fraction >= 0.95, "balance >= 95%");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"mass conservation", mass_conservation},
      {"energy dissipation", energy_dissipation},
      {"exact-solution convergence", exact_convergence},
      {"waiting-time scaling", waiting_time_scaling},
      {"criticality dichotomy", criticality},
      {"monotonicity monitor", monotonicity},
      {"counterexample behavior", counterexamples},
      {"cascade covariance", cascade_covariance},
      {"inequality monitors", inequalities},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s (%.1fs) %s\n", index, name, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
