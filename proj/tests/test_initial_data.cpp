#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "tfe/initial_data.hpp"

namespace {

using tfe::BallMode;
using tfe::ErrorKind;
using tfe::Profile;
using tfe_test::kind_of;

TEST(Bump, ShapeAndSmoothstep) {
  EXPECT_EQ(tfe::bump(0.5), 1.0);
  EXPECT_EQ(tfe::bump(0.0), 0.0);
  EXPECT_EQ(tfe::bump(1.0), 0.0);
  EXPECT_EQ(tfe::bump(-0.2), 0.0);
  EXPECT_EQ(tfe::smoothstep(0.0), 0.0);
  EXPECT_EQ(tfe::smoothstep(1.0), 1.0);
  EXPECT_DOUBLE_EQ(tfe::smoothstep(0.5), 0.5);
}

TEST(PowerLaw, DirectEvaluation) {
  const auto g = tfe::make_grid(-1.0, 2.0, 301);  // node at x = 0.5
  const auto p = tfe::power_law(g, 0.0, 2.0, 1.0, 1.0);
  EXPECT_NEAR(p[150], 0.25, 1e-14);
  for (std::size_t i = 0; i <= 100; ++i) EXPECT_EQ(p[i], 0.0);
}

TEST(PowerLaw, ZeroAmplitude) {
  const auto g = tfe::make_grid(-1.0, 2.0, 301);
  EXPECT_EQ(tfe::power_law(g, 0.0, 1.6, 0.0, 1.0).max(), 0.0);
}

TEST(PowerLaw, CriticalAverageAtNTwo) {
  // Full-ball mean of x_+^2 over (-r, r): r^2 / 6.
  const auto g = tfe::make_grid(-1.0, 2.0, 3001);
  const auto p = tfe::power_law(g, 0.0, 2.0, 1.0, 1.0);
  const double r = 0.25;
  EXPECT_NEAR(tfe::local_average(p, 0.0, r), r * r / 6.0, g.h * g.h);
}

TEST(PowerLaw, Errors) {
  const auto g = tfe::make_grid(-1.0, 2.0, 301);
  EXPECT_EQ(kind_of([&] { tfe::power_law(g, 0.0, 2.0, 1.0, 5.0); }), ErrorKind::out_of_domain);
  EXPECT_EQ(kind_of([&] { tfe::power_law(g, 0.0, -1.0, 1.0, 1.0); }), ErrorKind::invalid_argument);
}

TEST(Oscillatory, RangeOfTwoPlusSine) {
  const double n = 2.5;
  const auto g = tfe::make_grid(-1.0, 2.0, 3001);
  const auto p = tfe::oscillatory(g, 0.0, n, 1.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double x = g.x(i);
    if (x <= 0.0) {
      EXPECT_EQ(p[i], 0.0);
    } else if (x <= 0.9) {
      const double base = std::pow(x, 4.0 / n);
      EXPECT_GE(p[i], base * (1.0 - 1e-12));
      EXPECT_LE(p[i], 3.0 * base * (1.0 + 1e-12));
    }
  }
}

TEST(Oscillatory, MassCriterionBand) {
  // Between 1x and 3x the power-law value n / (2 (n + 4)) at n = 2.
  const double n = 2.0;
  const auto g = tfe::make_grid(-1.0, 2.0, 6001);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  const auto rep = tfe::criterion_mass(tfe::oscillatory(g, 0.0, n, 1.0), 0.0, n, radii);
  const double c = n / (2.0 * (n + 4.0));
  EXPECT_GE(rep.supremum, c);
  EXPECT_LE(rep.supremum, 3.0 * c);
}

TEST(Concentrated, DominatesBaseAndBumpGeometry) {
  const double n = 2.5;
  const auto g = tfe::make_grid(-1.0, 2.0, 6001);
  const auto p = tfe::concentrated(g, 0.0, n, 0.0, 2, 1.0);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    const double x = g.x(i);
    if (x > 0.0 && x <= 0.9) EXPECT_GE(p[i], std::pow(x, 4.0 / n) * (1.0 - 1e-12));
  }
  // Bump k sits on [1/k, 1/k + 1/k^2] with peak factor k^2 at its midpoint.
  const double delta = 0.32;
  const auto q = tfe::concentrated(g, 0.0, n, delta, 4, 1.0);
  for (int k = 2; k <= 4; ++k) {
    const double mid = 1.0 / k + 0.5 / (k * k);
    const auto i = static_cast<std::size_t>(std::lround((mid - g.x_min) / g.h));
    const double x = g.x(i);
    const double s = (x - 1.0 / k) * k * k;
    const double want = std::pow(x, 4.0 / n) + std::pow(x, 4.0 / n - delta) * k * k * 64.0 * std::pow(s * (1.0 - s), 3);
    EXPECT_NEAR(q[i], want, 1e-12 * want) << "k = " << k;
    if (k > 2) {
      // Gap between bump k and bump k - 1 carries the base only.
      const double end = 1.0 / k + 1.0 / (k * k);
      const double gap = 0.5 * (end + 1.0 / (k - 1));
      const auto j = static_cast<std::size_t>(std::lround((gap - g.x_min) / g.h));
      EXPECT_NEAR(q[j], std::pow(g.x(j), 4.0 / n), 1e-14);
    }
  }
}

TEST(Concentrated, MassCriterionGrowsWithKmax) {
  const double n = 2.5;
  const auto g = tfe::make_grid(-1.0, 2.0, 4801);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  double prev = 0.0;
  for (int k : {4, 8, 16}) {
    const auto p = tfe::concentrated(g, 0.0, n, 0.2 * 4.0 / n, k, 1.0);
    const double s = tfe::criterion_mass(p, 0.0, n, radii).supremum;
    EXPECT_GT(s, prev) << "k_max = " << k;
    prev = s;
  }
}

TEST(Concentrated, PnormGrowsSlowerThanMass) {
  const double n = 2.5;
  const double delta = 4.0 / n - 1.0 - 0.05;
  const auto g = tfe::make_grid(-1.0, 2.0, 4801);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  const auto p4 = tfe::concentrated(g, 0.0, n, delta, 4, 1.0);
  const auto p16 = tfe::concentrated(g, 0.0, n, delta, 16, 1.0);
  const double mass_growth =
      tfe::criterion_mass(p16, 0.0, n, radii).supremum / tfe::criterion_mass(p4, 0.0, n, radii).supremum;
  const double pnorm_growth = tfe::criterion_pnorm(p16, 0.0, n, 0.5, radii).supremum /
                              tfe::criterion_pnorm(p4, 0.0, n, 0.5, radii).supremum;
  EXPECT_GT(mass_growth, 1.0);
  EXPECT_LT(pnorm_growth, mass_growth);
}

TEST(Concentrated, UnderResolvedBumps) {
  const auto g = tfe::make_grid(-1.0, 2.0, 301);
  EXPECT_EQ(kind_of([&] { tfe::concentrated(g, 0.0, 2.5, 0.3, 16, 1.0); }), ErrorKind::under_resolved);
  EXPECT_EQ(kind_of([&] { tfe::concentrated(g, 0.0, 2.5, 1.7, 2, 1.0); }), ErrorKind::invalid_argument);
}

TEST(Generators, VanishLeftOfX0) {
  const auto g = tfe::make_grid(-1.0, 2.0, 2401);
  const double x0 = 0.1;
  for (const Profile& p : {tfe::power_law(g, x0, 1.3, 2.0, 1.0), tfe::oscillatory(g, x0, 2.5, 1.0),
                           tfe::concentrated(g, x0, 2.5, 0.3, 4, 1.0)}) {
    for (std::size_t i = 0; i < g.n_nodes && g.x(i) <= x0; ++i) EXPECT_EQ(p[i], 0.0);
    EXPECT_TRUE(p.boundary_clear());
  }
}

TEST(DyadicRadii, HalvingDownToMinCells) {
  const auto g = tfe::make_grid(-1.0, 2.0, 301);
  const auto r = tfe::dyadic_radii(g, 0.5);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r.front(), 0.5);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_EQ(r[i], r[i - 1] / 2);
  EXPECT_GE(r.back(), 4.0 * g.h);
  EXPECT_LT(r.back() / 2, 4.0 * g.h);
}

TEST(CriterionMass, ZeroAndCriticalPowerLaw) {
  const auto g = tfe::make_grid(-1.0, 2.0, 3001);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  const auto zero = tfe::criterion_mass(Profile(g), 0.0, 2.0, radii);
  EXPECT_EQ(zero.supremum, 0.0);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);

  const auto p = tfe::power_law(g, 0.0, 2.0, 1.0, 1.0);
  const auto rep = tfe::criterion_mass(p, 0.0, 2.0, radii);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    EXPECT_NEAR(rep.values[j], 1.0 / 6.0, 2.0 * g.h * g.h / (radii[j] * radii[j])) << "r = " << radii[j];
  }
  // One-sided mean of x^2 over (0, r) is r^2 / 3.
  const auto one = tfe::criterion_mass(p, 0.0, 2.0, radii, BallMode::one_sided);
  EXPECT_NEAR(one.values[0], 1.0 / 3.0, 1e-5);
}

TEST(Criteria, AmplitudeCovariance) {
  const double n = 2.5;
  const auto g = tfe::make_grid(-1.0, 2.0, 1201);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  const auto p = tfe::oscillatory(g, 0.0, n, 1.0);
  const auto p4 = p.scaled(4.0);
  const auto a = tfe::criterion_mass(p, 0.0, n, radii);
  const auto b = tfe::criterion_mass(p4, 0.0, n, radii);
  const auto c = tfe::criterion_energy(p, 0.0, n, radii);
  const auto d = tfe::criterion_energy(p4, 0.0, n, radii);
  const auto e = tfe::criterion_pnorm(p, 0.0, n, 0.5, radii);
  const auto f = tfe::criterion_pnorm(p4, 0.0, n, 0.5, radii);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    EXPECT_EQ(b.values[j], 4.0 * a.values[j]);
    EXPECT_NEAR(d.values[j], 4.0 * c.values[j], 1e-15 * d.values[j]);
    EXPECT_NEAR(f.values[j], 4.0 * e.values[j], 1e-14 * f.values[j]);
  }
}

TEST(CriterionMass, DecayAndGrowthAroundCriticalExponent) {
  const double n = 2.5;
  const auto g = tfe::make_grid(-1.0, 2.0, 3001);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  const auto flat = tfe::criterion_mass(tfe::power_law(g, 0.0, 4.0 / n + 0.3, 1.0, 1.0), 0.0, n, radii);
  const auto steep = tfe::criterion_mass(tfe::power_law(g, 0.0, 4.0 / n - 0.3, 1.0, 1.0), 0.0, n, radii);
  for (std::size_t j = 1; j < radii.size(); ++j) {
    EXPECT_LT(flat.values[j], flat.values[j - 1]);
    EXPECT_GT(steep.values[j], steep.values[j - 1]);
  }
}

TEST(CriterionEnergy, ZeroAndBoundedForCriticalPowerLaw) {
  const auto g = tfe::make_grid(-1.0, 2.0, 6001);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  EXPECT_EQ(tfe::criterion_energy(Profile(g), 0.0, 2.0, radii).supremum, 0.0);
  // r^{-1} ((1/(2r)) int_0^r (2x)^2 dx)^{1/2} = sqrt(2/3) for every r.
  const auto rep = tfe::criterion_energy(tfe::power_law(g, 0.0, 2.0, 1.0, 1.0), 0.0, 2.0, radii);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    EXPECT_NEAR(rep.values[j], std::sqrt(2.0 / 3.0), 2.0 * g.h / radii[j]) << "r = " << radii[j];
  }
}

TEST(CriterionEnergy, OscillatoryGrowsTowardSmallRadii) {
  const double n = 2.0;
  const auto g = tfe::make_grid(-1.0, 2.0, 9601);
  // Radii whose local wavelength 2 pi r^2 spans at least 8 cells.
  std::vector<double> radii;
  for (double r = 0.5; 2.0 * M_PI * r * r >= 8.0 * g.h; r /= 2) radii.push_back(r);
  ASSERT_GE(radii.size(), 3u);
  const auto rep = tfe::criterion_energy(tfe::oscillatory(g, 0.0, n, 1.0), 0.0, n, radii);
  // Growth signature: the value at r / 4 exceeds the value at r.
  for (std::size_t j = 2; j < radii.size(); ++j) EXPECT_GT(rep.values[j], rep.values[j - 2]);
}

TEST(CriterionPnorm, ConstantAndZero) {
  const auto g = tfe::make_grid(-1.0, 1.0, 401);
  const auto radii = tfe::dyadic_radii(g, 0.5);
  const auto c = tfe_test::sample(g, [](double x) { return std::abs(x) < 0.9 ? 2.0 : 0.0; });
  const double n = 2.5;
  const auto rep = tfe::criterion_pnorm(c, 0.0, n, 0.5, radii);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    EXPECT_NEAR(rep.values[j], std::pow(radii[j], -4.0 / n) * 2.0, 1e-12 * rep.values[j]);
  }
  EXPECT_EQ(rep.supremum, rep.values.back());
  EXPECT_EQ(tfe::criterion_pnorm(Profile(g), 0.0, n, 0.5, radii).supremum, 0.0);
}

TEST(CriterionCsv, Header) {
  const auto g = tfe::make_grid(-1.0, 1.0, 101);
  const auto rep = tfe::criterion_mass(Profile(g), 0.0, 2.5, tfe::dyadic_radii(g, 0.5));
  std::ostringstream os;
  tfe::write_criterion_csv(os, rep);
  EXPECT_EQ(os.str().substr(0, 8), "r,value\n");
  std::ostringstream js;
  tfe::write_criterion_json(js, rep);
  EXPECT_NE(js.str().find("\"supremum\""), std::string::npos);
  EXPECT_NE(js.str().find("\"r_min\""), std::string::npos);
}

TEST(TheoremBounds, Examples) {
  const auto unit = tfe::theorem_bounds(1.0, 2.5, 1.0, 1.0);
  EXPECT_EQ(unit.lower_T, 1.0);
  EXPECT_EQ(unit.upper_T, 1.0);

  const auto b = tfe::theorem_bounds(2.0, 2.5, 0.1, 10.0);
  EXPECT_NEAR(b.lower_T, 0.1 * std::pow(2.0, -2.5), 1e-16);
  EXPECT_NEAR(b.upper_T, 10.0 * std::pow(2.0, -2.5), 1e-14);

  const auto k1 = tfe::theorem_bounds(3.0, 2.2, 0.5, 2.0);
  const auto k2 = tfe::theorem_bounds(6.0, 2.2, 0.5, 2.0);
  EXPECT_NEAR(k2.lower_T, k1.lower_T / std::pow(2.0, 2.2), 1e-15);
  EXPECT_NEAR(k2.upper_T, k1.upper_T / std::pow(2.0, 2.2), 1e-15);

  const auto z = tfe::theorem_bounds(0.0, 2.5, 0.1, 10.0);
  EXPECT_TRUE(z.no_forward_motion_implied);
  EXPECT_TRUE(std::isinf(z.upper_T));
}

TEST(TheoremBounds, Errors) {
  EXPECT_EQ(kind_of([] { tfe::theorem_bounds(1.0, 3.5, 0.1, 1.0); }), ErrorKind::unsupported_range);
  EXPECT_EQ(kind_of([] { tfe::theorem_bounds(1.0, 2.5, 2.0, 1.0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { tfe::theorem_bounds(-1.0, 2.5, 0.1, 1.0); }), ErrorKind::invalid_argument);
}

}  // namespace
