#include "tfe/mobility.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "tfe/error.hpp"

namespace tfe {

namespace {

constexpr int kGaussPoints = 8;

struct GaussRule {
  std::array<double, kGaussPoints> node{};
  std::array<double, kGaussPoints> weight{};
};

// Gauss-Legendre on [0, 1] by Newton iteration on P_8.
GaussRule make_gauss_rule() {
  GaussRule rule;
  constexpr int m = kGaussPoints;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = m * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.node[i] = 0.5 * (1.0 - z);
    rule.weight[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

void check_heights(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "face mobility needs nonnegative heights");
  }
}

// Mean of s^-n over the segment between a and b, with derivatives.
struct InverseMean {
  double value;
  double d_a;
  double d_b;
};

InverseMean inverse_power_mean(double a, double b, double n) {
  const double d = a - b;
  const double gap = std::abs(d) / (a + b);
  if (gap < 0.1) {
    const GaussRule& g = gauss_rule();
    InverseMean m{0.0, 0.0, 0.0};
    for (int k = 0; k < kGaussPoints; ++k) {
      const double tau = g.node[k];
      const double s = b + tau * d;
      const double p = std::pow(s, -n);
      const double dp = -n * p / s;
      m.value += g.weight[k] * p;
      m.d_a += g.weight[k] * tau * dp;
      m.d_b += g.weight[k] * (1.0 - tau) * dp;
    }
    return m;
  }
  double integral = 0.0;
  if (n == 1.0) {
    integral = std::log(a) - std::log(b);
  } else {
    integral = (std::pow(a, 1.0 - n) - std::pow(b, 1.0 - n)) / (1.0 - n);
  }
  const double value = integral / d;
  return {value, (std::pow(a, -n) - value) / d, (value - std::pow(b, -n)) / d};
}

FaceMobility entropy_mean(double a, double b, double n) {
  if (a == 0.0 || b == 0.0) return {};
  if (a == b) {
    const double v = std::pow(a, n);
    const double dv = 0.5 * n * v / a;
    return {v, dv, dv};
  }
  const InverseMean m = inverse_power_mean(a, b, n);
  const double value = 1.0 / m.value;
  const double inv2 = value * value;
  return {value, -m.d_a * inv2, -m.d_b * inv2};
}

FaceMobility shifted_arithmetic(double a, double b, double n, double eps) {
  const double sa = a + eps;
  const double sb = b + eps;
  const double pa = std::pow(sa, n);
  const double pb = std::pow(sb, n);
  FaceMobility m{0.5 * (pa + pb), 0.0, 0.0};
  if (sa > 0.0) m.d_a = 0.5 * n * pa / sa;
  if (sb > 0.0) m.d_b = 0.5 * n * pb / sb;
  return m;
}

}  // namespace

std::string_view to_string(MobilityKind kind) noexcept {
  switch (kind) {
    case MobilityKind::entropy_consistent: return "entropy_consistent";
    case MobilityKind::arithmetic_mean: return "arithmetic_mean";
    case MobilityKind::regularized: return "regularized";
    case MobilityKind::upwind: return "upwind";
    case MobilityKind::upwind_limited: return "upwind_limited";
  }
  return "unknown";
}

FaceMobility face_mobility_with_derivatives(double a, double b, double n, MobilityVariant variant) {
  check_heights(a, b);
  switch (variant.kind) {
    case MobilityKind::entropy_consistent: return entropy_mean(a, b, n);
    case MobilityKind::arithmetic_mean: return shifted_arithmetic(a, b, n, 0.0);
    case MobilityKind::regularized: return shifted_arithmetic(a, b, n, variant.eps);
    case MobilityKind::upwind:
    case MobilityKind::upwind_limited: return {};
  }
  return {};
}

double face_mobility(double a, double b, double n, MobilityVariant variant) {
  return face_mobility_with_derivatives(a, b, n, variant).value;
}

}  // namespace tfe
