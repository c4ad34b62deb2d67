#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "tfe/diagnostics.hpp"

namespace {

using tfe::CylinderMode;
using tfe::ErrorKind;
using tfe::Profile;
using tfe::SlippageMode;
using tfe_test::kind_of;
using tfe_test::sample;

tfe::TimeSeries constant_series(const Profile& p, std::initializer_list<double> times) {
  tfe::TimeSeries s;
  for (double t : times) s.records.push_back({t, p, {}});
  return s;
}

// Spreading cap under upwind mobility, recorded every step.
tfe::TimeSeries spreading_cap(double n, double t_end) {
  const auto g = tfe::make_grid(-1.0, 1.0, 161);
  const auto p = sample(g, [](double x) { return std::max(0.0, 1.0 - x * x / 0.09); });
  tfe::SolverConfig cfg;
  cfg.n = n;
  cfg.mobility.kind = tfe::MobilityKind::upwind;
  cfg.dt_max = 1e-5;
  return tfe::run(p, cfg, t_end, 0.0);
}

// lambda u(x, lambda^n t) as a series: same profiles scaled, times compressed.
tfe::TimeSeries rescaled(const tfe::TimeSeries& s, double lambda, double n) {
  tfe::TimeSeries out;
  for (const auto& r : s.records) out.records.push_back({r.t * std::pow(lambda, -n), r.profile.scaled(lambda), {}});
  return out;
}

TEST(MonotonicityParams, Branches) {
  auto a = tfe::monotonicity_params(2.2);
  EXPECT_NEAR(a.alpha, -0.61, 1e-14);
  EXPECT_EQ(a.gamma, -2.0);
  auto b = tfe::monotonicity_params(2.95);
  EXPECT_NEAR(b.alpha, -0.975, 1e-14);
  EXPECT_EQ(b.gamma, -1.1);
  auto c = tfe::monotonicity_params(32.0 / 11.0);
  EXPECT_NEAR(c.alpha, -21.0 / 22.0, 1e-14);
  EXPECT_EQ(c.gamma, -1.1);
}

TEST(MonotonicityParams, RangeInvariants) {
  for (double n = 2.01; n < 3.0; n += 0.01) {
    const auto p = tfe::monotonicity_params(n);
    EXPECT_GT(1.0 + p.alpha, 0.0) << n;
    EXPECT_LT(p.alpha, 0.0) << n;
    EXPECT_LT(p.gamma, -1.0) << n;
  }
  EXPECT_EQ(kind_of([] { tfe::monotonicity_params(2.0); }), ErrorKind::unsupported_range);
  EXPECT_EQ(kind_of([] { tfe::monotonicity_params(3.0); }), ErrorKind::unsupported_range);
}

TEST(WeightedEntropy, ZeroProfile) {
  EXPECT_EQ(tfe::weighted_entropy(Profile(tfe::make_grid(-1, 1, 101)), 0.0, -0.6, -2.0), 0.0);
}

TEST(WeightedEntropy, QuadraticBumpOracle) {
  // int_1^2 4 (x-1)(2-x) x^-2 dx = 4 (3 ln 2 - 2).
  const auto g = tfe::make_grid(-1.0, 3.0, 4001);
  const auto p = sample(g, [](double x) { return std::max(0.0, 4.0 * (x - 1.0) * (2.0 - x)); });
  EXPECT_NEAR(tfe::weighted_entropy(p, 0.0, 0.0, -2.0), 4.0 * (3.0 * std::log(2.0) - 2.0), 1e-5);
}

TEST(WeightedEntropy, Homogeneity) {
  const auto g = tfe::make_grid(-1.0, 3.0, 401);
  const auto p = sample(g, [](double x) { return std::max(0.0, (x - 1.0) * (2.0 - x)); });
  const double a = -0.61, w = tfe::weighted_entropy(p, 0.0, a, -2.0);
  EXPECT_NEAR(tfe::weighted_entropy(p.scaled(3.0), 0.0, a, -2.0), std::pow(3.0, 1.0 + a) * w, 1e-12 * w);
}

TEST(WeightedEntropy, Errors) {
  const auto g = tfe::make_grid(-1.0, 1.0, 101);
  const auto p = sample(g, [](double x) { return std::max(0.0, 0.25 - x * x); });
  EXPECT_EQ(kind_of([&] { tfe::weighted_entropy(p, 0.0, -0.6, -2.0); }), ErrorKind::singular_weight);
  EXPECT_EQ(kind_of([&] { tfe::weighted_entropy(p, 0.9, -1.0, -2.0); }), ErrorKind::invalid_argument);
}

TEST(MonotonicityMonitor, ConstantSeriesHasNoViolations) {
  const auto g = tfe::make_grid(-1.0, 3.0, 401);
  const auto p = sample(g, [](double x) { return std::max(0.0, (x - 1.0) * (2.0 - x)); });
  const auto rep = tfe::monotonicity_monitor(constant_series(p, {0.0, 0.1, 0.2}), 0.0, 2.5);
  ASSERT_EQ(rep.entries.size(), 3u);
  EXPECT_EQ(rep.violations, 0);
  for (const auto& e : rep.entries) EXPECT_EQ(e.increment, 0.0);
  EXPECT_FALSE(rep.hypothesis_lost_at.has_value());
}

TEST(MonotonicityMonitor, FlagsDecrease) {
  const auto g = tfe::make_grid(-1.0, 3.0, 401);
  const auto p = sample(g, [](double x) { return std::max(0.0, (x - 1.0) * (2.0 - x)); });
  tfe::TimeSeries s;
  s.records.push_back({0.0, p, {}});
  s.records.push_back({0.1, p.scaled(0.5), {}});
  const auto rep = tfe::monotonicity_monitor(s, 0.0, 2.5);
  EXPECT_EQ(rep.violations, 1);
  EXPECT_TRUE(rep.entries[1].violation);
}

TEST(Cylinder, ZeroSeries) {
  const Profile z(tfe::make_grid(-1.0, 1.0, 201));
  const auto c = tfe::cylinder_quantities(constant_series(z, {0.0, 0.5, 1.0}), 0.0, 0.5, 1, 1.0, 0.1, 2.5, {});
  EXPECT_EQ(c.M_k, 0.0);
  EXPECT_EQ(*c.E_k, 0.0);
  EXPECT_EQ(c.normalized_M, 0.0);
}

TEST(Cylinder, ConstantHeightMass) {
  const auto g = tfe::make_grid(-1.0, 1.0, 201);
  const auto p = sample(g, [](double) { return 2.0; });
  const auto s = constant_series(p, {0.0, 1.0});
  for (int k = 1; k <= 3; ++k) {
    const auto c = tfe::cylinder_quantities(s, 0.0, 0.8, k, 1.0, 0.1, 2.5, {});
    EXPECT_NEAR(c.r_k, 0.8 / std::ldexp(1.0, k), 1e-15);
    EXPECT_NEAR(c.M_k, 2.0 * 2.0 * c.r_k, 1e-12);
    EXPECT_NEAR(c.normalized_M, c.M_k / std::pow(c.r_k, 4.0 / 2.5 + 1.0), 1e-12);
  }
}

TEST(Cylinder, NestedBallsHoldLess) {
  const auto s = spreading_cap(2.5, 2e-4);
  ASSERT_TRUE(s.ok());
  for (auto kind : {SlippageMode::weak, SlippageMode::strong}) {
    const CylinderMode mode{kind, 0.05};
    double prev_M = INFINITY, prev_Q = INFINITY;
    for (int k = 1; k <= 3; ++k) {
      const auto c = tfe::cylinder_quantities(s, 0.25, 0.5, k, 2e-4, 0.1, 2.5, mode);
      const double q = kind == SlippageMode::weak ? *c.E_k : *c.S_k;
      EXPECT_LE(c.M_k, prev_M);
      EXPECT_LE(q, prev_Q);
      prev_M = c.M_k;
      prev_Q = q;
    }
  }
}

TEST(Cylinder, Errors) {
  const auto g = tfe::make_grid(-1.0, 1.0, 101);
  const auto s = constant_series(Profile(g), {0.0, 1.0});
  EXPECT_EQ(kind_of([&] { tfe::cylinder_quantities(s, 0.0, 0.1, 2, 1.0, 0.1, 2.5, {}); }), ErrorKind::under_resolved);
  EXPECT_EQ(kind_of([&] { tfe::cylinder_quantities(s, 0.9, 0.5, 1, 1.0, 0.1, 2.5, {}); }), ErrorKind::out_of_domain);
  EXPECT_EQ(kind_of([&] { tfe::cylinder_quantities(s, 0.0, 0.5, 1, 2.0, 0.1, 2.5, {}); }),
            ErrorKind::insufficient_resolution);
}

TEST(Cascade, ZeroSeriesPasses) {
  const Profile z(tfe::make_grid(-1.0, 1.0, 201));
  const auto rep = tfe::degeneracy_cascade(constant_series(z, {0.0, 1.0}), 0.0, 0.5, 3, 1.0, 0.1, 1.0, 1.0, 2.5, {});
  ASSERT_EQ(rep.levels.size(), 3u);
  EXPECT_TRUE(rep.all_pass);
  for (const auto& l : rep.levels) {
    EXPECT_EQ(l.margin_M, 0.0);
    EXPECT_EQ(l.margin_ES, 0.0);
  }
}

TEST(Cascade, NormalizedMarginsAreScaleInvariant) {
  const double n = 2.5, lambda = 2.0, T = 2e-4;
  const auto s = spreading_cap(n, T);
  ASSERT_TRUE(s.ok());
  const auto sl = rescaled(s, lambda, n);
  for (auto kind : {SlippageMode::weak, SlippageMode::strong}) {
    const CylinderMode mode{kind, 0.05};
    const auto a = tfe::degeneracy_cascade(s, 0.25, 0.5, 3, T, 0.1, 1.0, 1.0, n, mode);
    const auto b = tfe::degeneracy_cascade(sl, 0.25, 0.5, 3, T * std::pow(lambda, -n), 0.1, 1.0, 1.0, n, mode);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(b.levels[k].margin_M, a.levels[k].margin_M, 1e-9 * a.levels[k].margin_M);
      EXPECT_NEAR(b.levels[k].margin_ES, a.levels[k].margin_ES, 1e-9 * a.levels[k].margin_ES);
    }
  }
}

TEST(CascadeDefaults, Values) {
  const auto w = tfe::cascade_defaults(SlippageMode::weak, 2.5);
  EXPECT_NEAR(w.beta, std::min(0.6, (0.5 + 4.0 / 5.5) / 2.0), 1e-15);
  EXPECT_NEAR(w.delta, 0.5 * ((2.5 + 6.0 - 7.5) / 5.5 + 2.0 - 1.25), 1e-15);
  const auto s = tfe::cascade_defaults(SlippageMode::strong, 2.5);
  EXPECT_EQ(s.beta, 0.1);
  EXPECT_EQ(s.delta, 1.0);
  EXPECT_EQ(s.alpha, 0.05);
}

TEST(Gns, Theta) {
  EXPECT_NEAR(tfe::gns_theta(1, 1, 2.0, 6.0, 2.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(tfe::gns_theta(1, 1, 1.0, 2.0, INFINITY), 0.25, 1e-15);
}

TEST(Gns, SineNorms) {
  // ||sin(pi x)||_6 on [0, 1] is (5/16)^(1/6).
  const auto g = tfe::make_grid(0.0, 1.0, 2001);
  const auto p = sample(g, [](double x) { return std::abs(std::sin(M_PI * x)); });
  const auto r = tfe::gns_check(p, 1, 6.0, 2.0, 2.0, 0.0, 1.0);
  EXPECT_NEAR(r.theta, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.lhs, std::pow(5.0 / 16.0, 1.0 / 6.0), 1e-6);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_LT(r.ratio, 1.0);
}

TEST(Gns, ZeroAndInadmissible) {
  const auto g = tfe::make_grid(0.0, 1.0, 101);
  EXPECT_EQ(tfe::gns_check(Profile(g), 1, 6.0, 2.0, 2.0, 0.0, 1.0).ratio, 0.0);
  const auto p = sample(g, [](double x) { return x; });
  EXPECT_EQ(kind_of([&] { tfe::gns_check(p, 1, 2.0, 6.0, 2.0, 0.0, 1.0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([&] { tfe::gns_check(p, 3, 6.0, 2.0, 2.0, 0.0, 1.0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([&] { tfe::gns_check(p, 1, 6.0, 2.0, 2.0, 0.0, 1.5); }), ErrorKind::out_of_domain);
}

TEST(CutoffTest, Shape) {
  const auto c = tfe::Cutoff::plateau(0.0, 0.2, 0.6);
  EXPECT_EQ(c.value(0.1), 1.0);
  EXPECT_EQ(c.value(-0.7), 0.0);
  EXPECT_NEAR(c.value(0.4), 0.5, 1e-15);
  const double e = 1e-6;
  for (double x : {0.25, 0.4, -0.5}) {
    EXPECT_NEAR(c.d1(x), (c.value(x + e) - c.value(x - e)) / (2 * e), 1e-7);
    EXPECT_NEAR(c.d2(x), (c.d1(x + e) - c.d1(x - e)) / (2 * e), 1e-6);
  }
  EXPECT_EQ(tfe::Cutoff::unit().value(1e6), 1.0);
}

TEST(BernisGruen, ConstantIsZero) {
  const auto g = tfe::make_grid(-1.0, 1.0, 201);
  const auto p = sample(g, [](double) { return 1.0; });
  const auto r = tfe::bernis_gruen_check(p, tfe::Cutoff::plateau(0.0, 0.3, 0.6), 2.5);
  EXPECT_EQ(r.lhs_gradient, 0.0);
  EXPECT_EQ(r.rhs_dissipation, 0.0);
}

TEST(BernisGruen, AmplitudeInvariance) {
  const auto g = tfe::make_grid(-1.0, 1.0, 401);
  const auto p = sample(g, [](double x) { return 1.2 + std::cos(3.0 * x); });
  const auto cut = tfe::Cutoff::plateau(0.0, 0.3, 0.6);
  const double r1 = tfe::bernis_gruen_check(p, cut, 2.5).ratio;
  const double r2 = tfe::bernis_gruen_check(p.scaled(5.0), cut, 2.5).ratio;
  EXPECT_GT(r1, 0.0);
  EXPECT_NEAR(r2, r1, 1e-12 * r1);
}

TEST(BernisGruen, Errors) {
  const auto g = tfe::make_grid(-1.0, 1.0, 201);
  const auto p = sample(g, [](double x) { return std::max(0.0, 0.04 - x * x); });
  EXPECT_EQ(kind_of([&] { tfe::bernis_gruen_check(p, tfe::Cutoff::plateau(0.0, 0.3, 0.6), 2.5); }),
            ErrorKind::hypothesis_violated);
  const auto q = sample(g, [](double) { return 1.0; });
  EXPECT_EQ(kind_of([&] { tfe::bernis_gruen_check(q, tfe::Cutoff::unit(), 3.0); }), ErrorKind::unsupported_range);
}

TEST(EnergyBalance, ZeroSeries) {
  const Profile z(tfe::make_grid(-1.0, 1.0, 101));
  const auto rep = tfe::energy_balance_monitor(constant_series(z, {0.0, 0.1, 0.2}), tfe::Cutoff::unit(), {});
  ASSERT_EQ(rep.intervals.size(), 2u);
  EXPECT_EQ(rep.satisfied_fraction, 1.0);
  for (const auto& i : rep.intervals) EXPECT_EQ(i.residual, 0.0);
}

TEST(EnergyBalance, SpreadingRunSatisfiesBalance) {
  const auto s = spreading_cap(2.5, 2e-4);
  ASSERT_TRUE(s.ok());
  tfe::EnergyBalanceOptions opt;
  opt.n = 2.5;
  opt.mobility.kind = tfe::MobilityKind::upwind;
  const auto unit = tfe::energy_balance_monitor(s, tfe::Cutoff::unit(), opt);
  EXPECT_EQ(unit.satisfied_fraction, 1.0);
  for (const auto& i : unit.intervals) {
    EXPECT_LT(i.dissipation, 0.0);
    EXPECT_EQ(i.commutator, 0.0);
  }
  opt.beta = 0.5;
  const auto local = tfe::energy_balance_monitor(s, tfe::Cutoff::plateau(0.3, 0.1, 0.4), opt);
  EXPECT_GE(local.satisfied_fraction, 0.95);
}

TEST(EnergyBalance, NeedsTwoRecords) {
  const Profile z(tfe::make_grid(-1.0, 1.0, 101));
  EXPECT_EQ(kind_of([&] { tfe::energy_balance_monitor(constant_series(z, {0.0}), tfe::Cutoff::unit(), {}); }),
            ErrorKind::insufficient_resolution);
}

TEST(Serialization, Headers) {
  const Profile z(tfe::make_grid(-1.0, 1.0, 201));
  const auto s = constant_series(z, {0.0, 1.0});
  std::stringstream a, b;
  tfe::write_cascade_csv(a, tfe::degeneracy_cascade(s, 0.0, 0.5, 2, 1.0, 0.1, 1.0, 1.0, 2.5, {}));
  tfe::write_energy_balance_csv(b, tfe::energy_balance_monitor(s, tfe::Cutoff::unit(), {}));
  std::string ha, hb;
  std::getline(a, ha);
  std::getline(b, hb);
  EXPECT_EQ(ha.substr(0, 6), "k,r_k,");
  EXPECT_EQ(hb.substr(0, 6), "t0,t1,");
}

}  // namespace
