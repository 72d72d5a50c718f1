#include "constructa/unicycle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "constructa/error.hpp"

namespace constructa {

namespace {

constexpr double kRk4MaxStep = 1e-3;

double time_slack(double horizon) { return 1e-9 * std::max(1.0, horizon); }

UnicycleState advance(const UnicycleState& s, const ControlSegment& seg, double tau) {
  UnicycleState out;
  if (std::abs(seg.omega) < kStraightOmega) {
    out.x = s.x + seg.v * tau * std::cos(s.theta);
    out.y = s.y + seg.v * tau * std::sin(s.theta);
    out.theta = s.theta;
  } else {
    const double r = seg.v / seg.omega;
    const double th = s.theta + seg.omega * tau;
    out.x = s.x + r * (std::sin(th) - std::sin(s.theta));
    out.y = s.y - r * (std::cos(th) - std::cos(s.theta));
    out.theta = th;
  }
  return out;
}

// Unwrapped states at every segment boundary; starts.size() == segments + 1.
struct Nominal {
  std::vector<double> start_times;
  std::vector<UnicycleState> starts;
};

Nominal nominal(const UnicycleControls& controls, const UnicycleState& initial) {
  Nominal n;
  n.start_times.push_back(0.0);
  n.starts.push_back(initial);
  for (const auto& seg : controls.segments) {
    n.starts.push_back(advance(n.starts.back(), seg, seg.duration));
    n.start_times.push_back(n.start_times.back() + seg.duration);
  }
  return n;
}

std::size_t segment_index(const Nominal& n, double t) {
  const auto it = std::upper_bound(n.start_times.begin(), n.start_times.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(n.start_times.begin(), it));
  const std::size_t segments = n.start_times.size() - 1;
  return std::min(idx == 0 ? 0 : idx - 1, segments - 1);
}

void check_time(double t, double horizon) {
  if (!(t >= -time_slack(horizon) && t <= horizon + time_slack(horizon))) {
    throw Error(ErrorCode::kTimeOutOfRange,
                "time " + std::to_string(t) + " outside [0, " + std::to_string(horizon) + "]");
  }
}

Eigen::Matrix3d f_matrix(double v, double theta) {
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  f(0, 2) = -v * std::sin(theta);
  f(1, 2) = v * std::cos(theta);
  return f;
}

}  // namespace

double UnicycleControls::horizon() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

void validate_controls(const UnicycleControls& controls) {
  for (std::size_t i = 0; i < controls.segments.size(); ++i) {
    const auto& s = controls.segments[i];
    if (!std::isfinite(s.v) || !std::isfinite(s.omega) || !std::isfinite(s.duration)) {
      throw Error(ErrorCode::kSchemaError,
                  "controls[" + std::to_string(i) + "] has a non-finite value");
    }
    if (s.duration <= 0.0) {
      throw Error(ErrorCode::kSchemaError,
                  "controls[" + std::to_string(i) + "].duration must be positive");
    }
  }
}

std::vector<UnicycleState> integrate(const UnicycleControls& controls,
                                     const std::vector<double>& sample_times,
                                     const UnicycleState& initial) {
  validate_controls(controls);
  const double horizon = controls.horizon();
  std::vector<UnicycleState> out;
  out.reserve(sample_times.size());
  if (sample_times.empty()) return out;
  if (controls.segments.empty()) {
    for (double t : sample_times) {
      if (std::abs(t) > time_slack(0.0)) {
        throw Error(ErrorCode::kTimeOutOfRange, "no controls: only t = 0 is defined");
      }
      out.push_back(initial);
    }
    return out;
  }
  const Nominal n = nominal(controls, initial);
  double prev = -time_slack(horizon);
  for (double t : sample_times) {
    check_time(t, horizon);
    if (t < prev) throw Error(ErrorCode::kTimeOutOfRange, "sample times must be nondecreasing");
    prev = t;
    const double tc = std::clamp(t, 0.0, horizon);
    const std::size_t i = segment_index(n, tc);
    UnicycleState s = advance(n.starts[i], controls.segments[i], tc - n.start_times[i]);
    s.theta = wrap_angle(s.theta);
    out.push_back(s);
  }
  return out;
}

Eigen::Matrix3d sensitivity(const UnicycleControls& controls, double t, double t_f,
                            const UnicycleState& initial) {
  validate_controls(controls);
  const double horizon = controls.horizon();
  check_time(t, horizon);
  check_time(t_f, horizon);
  if (t > t_f) throw Error(ErrorCode::kTimeOutOfRange, "sensitivity needs t <= t_f");
  Eigen::Matrix3d phi = Eigen::Matrix3d::Identity();
  if (controls.segments.empty() || t == t_f) return phi;

  const Nominal n = nominal(controls, initial);
  const double lo = std::clamp(t, 0.0, horizon);
  double cur = std::clamp(t_f, 0.0, horizon);
  // Walk backwards one segment at a time so v and omega stay constant per step.
  while (cur > lo) {
    std::size_t i = segment_index(n, cur);
    if (cur <= n.start_times[i] && i > 0) --i;
    const ControlSegment& seg = controls.segments[i];
    const double seg_start = std::max(n.start_times[i], lo);
    const double span = cur - seg_start;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / kRk4MaxStep)));
    const double h = -span / steps;
    auto theta_at = [&](double tau) {
      return n.starts[i].theta + seg.omega * (tau - n.start_times[i]);
    };
    for (int k = 0; k < steps; ++k) {
      const double t0 = cur + k * h;
      const Eigen::Matrix3d k1 = f_matrix(seg.v, theta_at(t0)) * phi;
      const Eigen::Matrix3d k2 = f_matrix(seg.v, theta_at(t0 + 0.5 * h)) * (phi + 0.5 * h * k1);
      const Eigen::Matrix3d k3 = f_matrix(seg.v, theta_at(t0 + 0.5 * h)) * (phi + 0.5 * h * k2);
      const Eigen::Matrix3d k4 = f_matrix(seg.v, theta_at(t0 + h)) * (phi + h * k3);
      phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    cur = seg_start;
  }
  return phi;
}

TrajectoryV controls_to_trajectory_v(const UnicycleControls& controls,
                                     const std::vector<double>& sample_times) {
  TrajectoryV traj;
  std::vector<double> headings;
  for (const auto& s : integrate(controls, sample_times)) {
    traj.points.emplace_back(s.x, s.y);
    headings.push_back(s.theta);
  }
  traj.headings = std::move(headings);
  return traj;
}

}  // namespace constructa
