#pragma once

#include <cmath>

// Independent check of the n = 1 source solution by substitution into
// u_t + (u u_xxx)_x, evaluated in long double with finite differences.
namespace tfe_test {

inline long double source_u(long double x, long double t, long double a) {
  const long double s = std::pow(t, -0.2L);
  const long double eta = x * s;
  const long double w = a * a - eta * eta;
  return w > 0.0L ? s * w * w / 120.0L : 0.0L;
}

/// Third x-derivative from the 5-point stencil; exact on quartics.
inline long double source_uxxx(long double x, long double t, long double a, long double h) {
  return (source_u(x + 2 * h, t, a) - 2 * source_u(x + h, t, a) + 2 * source_u(x - h, t, a) -
          source_u(x - 2 * h, t, a)) /
         (2 * h * h * h);
}

/// u_t + (u u_xxx)_x at a point of the support at least 5% of its
/// half-width from the edge. The flux is a quintic in x, so the 7-point first
/// derivative is exact and h only trades round-off; u_t uses a
/// Richardson-extrapolated central difference.
inline long double source_residual(long double x, long double t, long double a) {
  const long double h = 1e-2L * a * std::pow(t, 0.2L);
  const auto flux = [&](long double y) { return source_u(y, t, a) * source_uxxx(y, t, a, h); };
  const long double fx = (-flux(x - 3 * h) + 9 * flux(x - 2 * h) - 45 * flux(x - h) + 45 * flux(x + h) -
                          9 * flux(x + 2 * h) + flux(x + 3 * h)) /
                         (60 * h);
  const long double k = 1e-4L * t;
  const auto d = [&](long double s) { return (source_u(x, t + s, a) - source_u(x, t - s, a)) / (2 * s); };
  const long double ut = (4 * d(k / 2) - d(k)) / 3;
  return ut + fx;
}

}  // namespace tfe_test
