#pragma once

#include <optional>
#include <vector>

#include "constructa/geom.hpp"

namespace constructa {

// Measurement points expressed in the vehicle frame, in measurement order.
struct TrajectoryV {
  std::vector<Point2> points;
  std::optional<std::vector<double>> headings;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Length of the segment joining points k and k + 1.
  double segment_length(std::size_t k) const { return (points[k + 1] - points[k]).norm(); }

  bool operator==(const TrajectoryV&) const = default;
};

}  // namespace constructa
