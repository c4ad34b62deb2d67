#include "tfe/grid_profile.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tfe/error.hpp"

namespace tfe {

namespace {

// Slack for ball endpoints that land on the grid ends up to round-off.
double edge_slack(const Grid1D& g) { return 1e-9 * g.h; }

void check_ball(const Grid1D& g, double a, double b, double r) {
  if (!(r >= 2.0 * g.h * (1.0 - 1e-12))) {
    throw Error(ErrorKind::under_resolved, "radius " + std::to_string(r) + " below 2h");
  }
  if (a < g.x_min - edge_slack(g) || b > g.x_max() + edge_slack(g)) {
    throw Error(ErrorKind::out_of_domain, "ball [" + std::to_string(a) + ", " + std::to_string(b) +
                                              "] leaves the grid");
  }
}

}  // namespace

Grid1D make_grid(double x_min, double x_max, std::size_t n_nodes) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw Error(ErrorKind::invalid_grid, "non-finite bounds");
  }
  if (!(x_max > x_min)) throw Error(ErrorKind::invalid_grid, "x_max must exceed x_min");
  if (n_nodes < kMinNodes) {
    throw Error(ErrorKind::invalid_grid, "need at least 8 nodes, got " + std::to_string(n_nodes));
  }
  return Grid1D{x_min, (x_max - x_min) / static_cast<double>(n_nodes - 1), n_nodes};
}

Profile::Profile(Grid1D grid) : grid_(grid), values_(grid.n_nodes, 0.0) {}

Profile::Profile(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_nodes) {
    throw Error(ErrorKind::invalid_profile, "value count does not match grid");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw Error(ErrorKind::invalid_profile,
                  "value at node " + std::to_string(i) + " is negative or non-finite");
    }
  }
}

double Profile::max() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

bool Profile::boundary_clear() const noexcept {
  const std::size_t n = values_.size();
  return n >= 4 && values_[0] == 0.0 && values_[1] == 0.0 && values_[n - 2] == 0.0 &&
         values_[n - 1] == 0.0;
}

Profile Profile::scaled(double factor) const {
  if (!(factor >= 0.0)) throw Error(ErrorKind::invalid_argument, "negative scale factor");
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return Profile(grid_, std::move(v));
}

double mass(const Profile& p) {
  const auto u = p.values();
  if (u.empty()) return 0.0;
  double s = 0.0;
  for (double v : u) s += v;
  s -= 0.5 * (u.front() + u.back());
  return p.grid().h * s;
}

double dirichlet_energy(const Profile& p) {
  const auto u = p.values();
  const double h = p.grid().h;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double d = u[i + 1] - u[i];
    s += d * d;
  }
  return 0.5 * s / h;
}

double integrate_nodal(const Grid1D& g, std::span<const double> f, double a, double b) {
  if (b <= a) return 0.0;
  const double h = g.h;
  const auto last_cell = static_cast<long>(g.n_nodes) - 2;
  const auto cell_of = [&](double x) {
    return std::clamp(static_cast<long>(std::floor((x - g.x_min) / h)), 0L, last_cell);
  };
  const long ca = cell_of(a);
  const long cb = cell_of(b);
  const auto value_at = [&](long c, double x) {
    const double s = (x - g.x(static_cast<std::size_t>(c))) / h;
    return (1.0 - s) * f[static_cast<std::size_t>(c)] + s * f[static_cast<std::size_t>(c) + 1];
  };
  if (ca == cb) return 0.5 * (value_at(ca, a) + value_at(ca, b)) * (b - a);
  double total = 0.0;
  const double xa_end = g.x(static_cast<std::size_t>(ca) + 1);
  total += 0.5 * (value_at(ca, a) + f[static_cast<std::size_t>(ca) + 1]) * (xa_end - a);
  for (long c = ca + 1; c < cb; ++c) {
    total += 0.5 * (f[static_cast<std::size_t>(c)] + f[static_cast<std::size_t>(c) + 1]) * h;
  }
  const double xb_start = g.x(static_cast<std::size_t>(cb));
  total += 0.5 * (f[static_cast<std::size_t>(cb)] + value_at(cb, b)) * (b - xb_start);
  return total;
}

double integrate_cellwise(const Grid1D& g, std::span<const double> c, double a, double b) {
  if (b <= a) return 0.0;
  const double h = g.h;
  const auto last_cell = static_cast<long>(g.n_nodes) - 2;
  const auto cell_of = [&](double x) {
    return std::clamp(static_cast<long>(std::floor((x - g.x_min) / h)), 0L, last_cell);
  };
  const long ca = cell_of(a);
  const long cb = cell_of(b);
  if (ca == cb) return c[static_cast<std::size_t>(ca)] * (b - a);
  double total = c[static_cast<std::size_t>(ca)] * (g.x(static_cast<std::size_t>(ca) + 1) - a);
  for (long k = ca + 1; k < cb; ++k) total += c[static_cast<std::size_t>(k)] * h;
  total += c[static_cast<std::size_t>(cb)] * (b - g.x(static_cast<std::size_t>(cb)));
  return total;
}

std::vector<double> cell_gradient(const Profile& p) {
  const auto u = p.values();
  std::vector<double> g(u.size() - 1);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) g[i] = (u[i + 1] - u[i]) / p.grid().h;
  return g;
}

double local_average(const Profile& p, double x0, double r) {
  const Grid1D& g = p.grid();
  check_ball(g, x0 - r, x0 + r, r);
  const double a = std::max(x0 - r, g.x_min);
  const double b = std::min(x0 + r, g.x_max());
  return integrate_nodal(g, p.values(), a, b) / (2.0 * r);
}

double one_sided_average(const Profile& p, double x0, double r) {
  const Grid1D& g = p.grid();
  check_ball(g, x0, x0 + r, r);
  const double a = std::max(x0, g.x_min);
  const double b = std::min(x0 + r, g.x_max());
  return integrate_nodal(g, p.values(), a, b) / r;
}

void write_profile_csv(std::ostream& os, const Profile& p) {
  const auto old_prec = os.precision(17);
  os << "x,u\n";
  for (std::size_t i = 0; i < p.size(); ++i) os << p.grid().x(i) << ',' << p[i] << '\n';
  os.precision(old_prec);
}

Profile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,u", 0) != 0) {
    throw Error(ErrorKind::io, "profile CSV must start with header `x,u`");
  }
  std::vector<double> xs;
  std::vector<double> us;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    double x = 0.0;
    double u = 0.0;
    char comma = 0;
    if (!(row >> x >> comma >> u) || comma != ',') {
      throw Error(ErrorKind::io, "malformed profile row at line " + std::to_string(line_no));
    }
    xs.push_back(x);
    us.push_back(u);
  }
  if (xs.size() < kMinNodes) throw Error(ErrorKind::invalid_grid, "profile CSV has too few rows");
  const Grid1D g = make_grid(xs.front(), xs.back(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - g.x(i)) > 1e-9 * g.h) {
      throw Error(ErrorKind::invalid_grid, "profile CSV nodes are not uniformly spaced");
    }
  }
  return Profile(g, std::move(us));
}

}  // namespace tfe
