#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "constructa/trajectory.hpp"

namespace constructa {

struct ControlSegment {
  double v = 0.0;
  double omega = 0.0;
  double duration = 0.0;

  bool operator==(const ControlSegment&) const = default;
};

struct UnicycleControls {
  std::vector<ControlSegment> segments;

  double horizon() const;
  bool operator==(const UnicycleControls&) const = default;
};

struct UnicycleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2 position() const { return {x, y}; }
};

/// Below this |omega| a segment is integrated as a straight line.
inline constexpr double kStraightOmega = 1e-12;

/// Throws Error(kSchemaError) for non-positive durations or non-finite values.
void validate_controls(const UnicycleControls& controls);

/// Exact state at each requested time, starting from `initial` (the vehicle
/// frame origin by default). Times must be nondecreasing and inside
/// [0, horizon]; otherwise Error(kTimeOutOfRange).
std::vector<UnicycleState> integrate(const UnicycleControls& controls,
                                     const std::vector<double>& sample_times,
                                     const UnicycleState& initial = {});

/// Transition matrix Phi(t, t_f) of the variational equation
/// dPhi/dt = F(t) Phi with Phi(t_f, t_f) = I, integrated backwards with RK4
/// along the nominal trajectory started from `initial`.
Eigen::Matrix3d sensitivity(const UnicycleControls& controls, double t, double t_f,
                            const UnicycleState& initial = {});

TrajectoryV controls_to_trajectory_v(const UnicycleControls& controls,
                                     const std::vector<double>& sample_times);

}  // namespace constructa
