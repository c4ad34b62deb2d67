#pragma once

#include <string_view>

namespace tfe {

enum class MobilityKind { entropy_consistent, arithmetic_mean, regularized, upwind, upwind_limited };

struct MobilityVariant {
  MobilityKind kind = MobilityKind::entropy_consistent;
  /// Base shift for the regularized variant; ignored otherwise.
  double eps = 0.0;

  bool operator==(const MobilityVariant&) const = default;
};

std::string_view to_string(MobilityKind kind) noexcept;

/// Face mobility and its partial derivatives in both arguments.
struct FaceMobility {
  double value = 0.0;
  double d_a = 0.0;
  double d_b = 0.0;
};

/// Face mobility M(a, b) for mobility u^n.
///
/// entropy_consistent: M(a,b) = (a - b) / (G'(a) - G'(b)) with G'' = s^-n,
/// i.e. the reciprocal of the mean of s^-n over [min, max]; M(a,a) = a^n.
/// The value is 0 whenever either argument is 0.
/// arithmetic_mean: (a^n + b^n) / 2.
/// regularized: ((a+eps)^n + (b+eps)^n) / 2.
/// upwind: u^n taken from the node the flux leaves; it needs the flux
/// direction, so these functions return 0 and the solver evaluates it.
/// upwind_limited: like upwind, with the upwind height replaced by a linear
/// reconstruction at the face using a minmod slope; second order in smooth
/// regions and still 0 when the upwind node is dry.
///
/// Throws ErrorKind::invalid_argument on negative heights.
double face_mobility(double a, double b, double n, MobilityVariant variant);

/// Same as face_mobility, plus derivatives. Derivatives that are singular
/// at a zero argument are reported as 0; the solver treats such faces as
/// frozen.
FaceMobility face_mobility_with_derivatives(double a, double b, double n, MobilityVariant variant);

}  // namespace tfe
