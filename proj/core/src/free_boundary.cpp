#include "tfe/free_boundary.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "json.hpp"
#include "tfe/error.hpp"

namespace tfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_theta(double theta_rel) {
  if (!(theta_rel > 0.0 && theta_rel < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "theta_rel must lie in (0,1)");
  }
}

}  // namespace

SupportInterval support_interval(const Profile& p, double theta_rel) {
  check_theta(theta_rel);
  SupportInterval s;
  const double m = p.max();
  if (m == 0.0) return s;
  const double thr = theta_rel * m;
  const auto u = p.values();
  std::size_t i = 0;
  while (u[i] <= thr) ++i;
  std::size_t j = u.size() - 1;
  while (u[j] <= thr) --j;
  s.empty = false;
  s.i_left = i;
  s.i_right = j;
  s.left = p.grid().x(i);
  s.right = p.grid().x(j);
  return s;
}

std::string_view to_string(WaitingMode mode) noexcept {
  return mode == WaitingMode::outside_support ? "outside_support" : "on_boundary";
}

WaitingTimeDetector::WaitingTimeDetector(const Profile& u0, double x0, double theta_rel, double margin) {
  check_theta(theta_rel);
  const Grid1D& g = u0.grid();
  if (!(margin >= 2.0 * g.h * (1.0 - 1e-12))) {
    throw Error(ErrorKind::under_resolved, "margin below 2h");
  }
  if (x0 - margin < g.x_min - 1e-9 * g.h || x0 + margin > g.x_max() + 1e-9 * g.h) {
    throw Error(ErrorKind::out_of_domain, "x0 +- margin leaves the grid");
  }
  lo_ = static_cast<std::size_t>(std::ceil((x0 - margin - g.x_min) / g.h - 1e-9));
  hi_ = static_cast<std::size_t>(std::floor((x0 + margin - g.x_min) / g.h + 1e-9));

  est_.x0 = x0;
  est_.theta_used = theta_rel;
  est_.margin_used = margin;
  est_.t_star = kInf;
  est_.censored = true;

  const SupportInterval s = support_interval(u0, theta_rel);
  const double dist = s.empty ? kInf
                      : x0 < s.left  ? s.left - x0
                      : x0 > s.right ? x0 - s.right
                                     : 0.0;
  est_.mode = dist > margin ? WaitingMode::outside_support : WaitingMode::on_boundary;
}

bool WaitingTimeDetector::arrival(const Profile& p) const {
  if (est_.mode == WaitingMode::outside_support) {
    const SupportInterval s = support_interval(p, est_.theta_used);
    return !s.empty && s.left <= est_.x0 && est_.x0 <= s.right;
  }
  const double m = p.max();
  if (m == 0.0) return false;
  const double thr = est_.theta_used * m;
  for (std::size_t i = lo_; i <= hi_; ++i) {
    if (!(p[i] > thr)) return false;
  }
  return true;
}

bool WaitingTimeDetector::observe(double t, const Profile& p) {
  if (arrived()) return true;
  if (started_ && t < est_.t_last) {
    throw Error(ErrorKind::invalid_argument, "observations must be in time order");
  }
  const double t_prev = started_ ? est_.t_last : t;
  started_ = true;
  est_.t_last = t;
  if (!arrival(p)) return false;
  est_.censored = false;
  est_.t_star = t;
  est_.t_hit = t;
  est_.t_prev = t_prev;
  return true;
}

WaitingTimeEstimate waiting_time(const TimeSeries& series, double x0, double theta_rel, double margin) {
  if (series.records.empty() || series.records.front().t != 0.0) {
    throw Error(ErrorKind::invalid_argument, "series must start at t = 0");
  }
  WaitingTimeDetector det(series.records.front().profile, x0, theta_rel, margin);
  for (const Record& r : series.records) {
    if (det.observe(r.t, r.profile)) break;
  }
  return det.estimate();
}

void write_waiting_time_json(std::ostream& os, const WaitingTimeEstimate& est) {
  nlohmann::json j;
  j["x0"] = est.x0;
  j["mode"] = to_string(est.mode);
  j["theta_used"] = est.theta_used;
  j["margin_used"] = est.margin_used;
  j["censored"] = est.censored;
  if (est.censored) {
    j["t_star"] = "inf";
    j["censored_at"] = est.t_last;
  } else {
    j["t_star"] = est.t_star;
    j["bracket"] = {est.t_prev, est.t_hit};
  }
  os << j.dump(2) << '\n';
}

void write_interface_csv(std::ostream& os, const TimeSeries& series, double theta_rel) {
  const auto old_prec = os.precision(17);
  os << "t,left,right\n";
  for (const Record& r : series.records) {
    const SupportInterval s = support_interval(r.profile, theta_rel);
    os << r.t << ',';
    if (s.empty) {
      os << "nan,nan\n";
    } else {
      os << s.left << ',' << s.right << '\n';
    }
  }
  os.precision(old_prec);
}

}  // namespace tfe
