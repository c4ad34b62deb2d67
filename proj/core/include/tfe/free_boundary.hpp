#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>

#include "tfe/grid_profile.hpp"
#include "tfe/solver.hpp"

namespace tfe {

/// Threshold support [left, right] of a profile.
struct SupportInterval {
  double left = 0.0;
  double right = 0.0;
  bool empty = true;
  std::size_t i_left = 0;
  std::size_t i_right = 0;
};

/// Smallest interval holding every node with u > theta_rel * max(u); empty
/// for a zero profile. Throws invalid_argument unless 0 < theta_rel < 1.
SupportInterval support_interval(const Profile& p, double theta_rel);

enum class WaitingMode { outside_support, on_boundary };
std::string_view to_string(WaitingMode mode) noexcept;

struct WaitingTimeEstimate {
  double x0 = 0.0;
  WaitingMode mode = WaitingMode::on_boundary;
  double theta_used = 0.0;
  double margin_used = 0.0;
  /// First observed time at which the arrival condition holds; +inf when
  /// censored.
  double t_star = 0.0;
  bool censored = false;
  /// Observation times bracketing the arrival: t_prev < t* <= t_hit.
  double t_prev = 0.0;
  double t_hit = 0.0;
  /// Last observed time.
  double t_last = 0.0;
};

/// Incremental waiting-time detection, fed one state at a time in time
/// order, starting with the initial datum at t = 0.
///
/// The mode is fixed by u0: outside_support when x0 lies more than margin
/// from the threshold support, on_boundary otherwise. outside_support
/// arrives when x0 enters the support interval; on_boundary arrives when
/// every node of [x0 - margin, x0 + margin] exceeds theta_rel * max(u).
class WaitingTimeDetector {
 public:
  /// Throws out_of_domain when the margin window leaves the grid and
  /// under_resolved when margin < 2h.
  WaitingTimeDetector(const Profile& u0, double x0, double theta_rel, double margin);

  /// Returns true once arrival has been observed.
  bool observe(double t, const Profile& p);
  bool arrived() const noexcept { return !est_.censored; }
  /// Censored (t_star = +inf) until arrival is observed.
  const WaitingTimeEstimate& estimate() const noexcept { return est_; }

 private:
  bool arrival(const Profile& p) const;

  WaitingTimeEstimate est_;
  std::size_t lo_ = 0;
  std::size_t hi_ = 0;
  bool started_ = false;
};

/// Waiting time over the records of a series (which must start at t = 0).
WaitingTimeEstimate waiting_time(const TimeSeries& series, double x0, double theta_rel, double margin);

void write_waiting_time_json(std::ostream& os, const WaitingTimeEstimate& est);

/// Interface positions per record, CSV `t,left,right`; `nan` for empty support.
void write_interface_csv(std::ostream& os, const TimeSeries& series, double theta_rel);

}  // namespace tfe
