#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace tfe {

/// Uniform 1D mesh. Node i sits at x_min + i*h.
struct Grid1D {
  double x_min = 0.0;
  double h = 1.0;
  std::size_t n_nodes = 0;

  double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * h; }
  double x_max() const noexcept { return x(n_nodes - 1); }
  bool operator==(const Grid1D&) const = default;
};

inline constexpr std::size_t kMinNodes = 8;

/// Throws ErrorKind::invalid_grid on non-finite bounds, x_max <= x_min or
/// fewer than kMinNodes nodes.
Grid1D make_grid(double x_min, double x_max, std::size_t n_nodes);

/// Nonnegative film height sampled at the nodes of a grid.
class Profile {
 public:
  Profile() = default;
  /// Zero profile.
  explicit Profile(Grid1D grid);
  /// Throws ErrorKind::invalid_profile on size mismatch, negative or
  /// non-finite values.
  Profile(Grid1D grid, std::vector<double> values);

  const Grid1D& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  double max() const noexcept;
  /// True when the two outermost nodes on each side are exactly zero.
  bool boundary_clear() const noexcept;

  /// Pointwise amplitude rescaling; factor must be >= 0.
  Profile scaled(double factor) const;

  bool operator==(const Profile&) const = default;

 private:
  Grid1D grid_{};
  std::vector<double> values_;
};

/// Trapezoidal quadrature of u over the whole grid.
double mass(const Profile& p);

/// Discrete Dirichlet energy 1/2 * sum_faces h * ((u_{i+1} - u_i)/h)^2.
/// This is the energy the solver dissipates exactly.
double dirichlet_energy(const Profile& p);

/// Integral over [a, b] of the piecewise-linear interpolant of node values.
/// Requires x_min <= a <= b <= x_max.
double integrate_nodal(const Grid1D& grid, std::span<const double> node_values, double a, double b);

/// Integral over [a, b] of a cellwise-constant function (one value per cell).
double integrate_cellwise(const Grid1D& grid, std::span<const double> cell_values, double a, double b);

/// Cell slopes (u_{i+1} - u_i)/h, one per cell.
std::vector<double> cell_gradient(const Profile& p);

/// Mean of u over [x0 - r, x0 + r] with partial end cells.
/// Throws out_of_domain when the ball leaves the grid and under_resolved
/// when r < 2h.
double local_average(const Profile& p, double x0, double r);

/// Mean of u over (x0, x0 + r), same error rules as local_average.
double one_sided_average(const Profile& p, double x0, double r);

/// Two-column CSV `x,u` with header and 17 significant digits.
void write_profile_csv(std::ostream& os, const Profile& p);
Profile read_profile_csv(std::istream& is);

}  // namespace tfe
