#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "constructa/geom.hpp"
#include "constructa/trajectory.hpp"
#include "constructa/unicycle.hpp"

namespace constructa {

using AnchorId = int;

struct Anchor {
  AnchorId id = 0;
  Point2 position = Point2::Zero();
  double weight = 1.0;  // sensor weight used by the Gramian

  bool operator==(const Anchor&) const = default;
};

struct Tolerances {
  double collinear = 1e-9;   // m, perpendicular distance
  double tangency = 1e-9;    // m, circle tangency window
  double rank = 1e-8;        // relative to the largest singular value / eigenvalue
  double dedup = 1e-5;       // m and rad
  double degenerate = 1e-7;  // m, window for the measure-zero degenerate cases

  bool operator==(const Tolerances&) const = default;
};

struct SynthesisInfo {
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const SynthesisInfo&) const = default;
};

struct Scenario {
  std::vector<Anchor> anchors;
  TrajectoryV trajectory;
  std::vector<AnchorId> schedule;  // schedule[k] = anchor measured at instant k
  std::optional<std::vector<double>> rho;
  Tolerances tolerances;

  // Optional provenance: unicycle controls that generated the points, the
  // transform used to synthesize ranges, and the noise settings.
  std::optional<UnicycleControls> controls;
  std::optional<std::vector<double>> sample_times;
  std::optional<RigidTransform2> truth;
  std::optional<SynthesisInfo> synthesis;

  std::size_t size() const { return trajectory.size(); }
  bool has_measurements() const { return rho.has_value(); }

  const Point2& point(std::size_t k) const { return trajectory.points[k]; }
  /// Throws Error(kSchemaError) for an unknown id.
  const Anchor& anchor(AnchorId id) const;
  const Anchor& anchor_at(std::size_t k) const { return anchor(schedule[k]); }

  /// Ranges, or Error(kMissingMeasurements).
  const std::vector<double>& ranges() const;

  bool operator==(const Scenario& o) const;
};

enum class AnchorSetClass { kC1, kC2, kC3 };

const char* to_string(AnchorSetClass c);

/// Measurements grouped per anchor, anchors ordered by first appearance in
/// the schedule.
struct AnchorGroup {
  AnchorId id = 0;
  std::vector<std::size_t> indices;
};

std::vector<AnchorGroup> group_by_anchor(const Scenario& s);

std::vector<Point2> points_of(const Scenario& s, const AnchorGroup& g);

/// Checks every structural invariant. Throws Error(kSchemaError).
void validate(const Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
/// Parses text; syntax errors become Error(kParseError) with a line number.
Scenario scenario_from_string(const std::string& text);
nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// rho_k = |apply(truth, P_k) - B_k| + N(0, noise_std), clamped at zero.
std::vector<double> synthesize_measurements(const Scenario& s, const RigidTransform2& truth,
                                            double noise_std, std::uint64_t seed = 0);

AnchorSetClass classify_anchor_set(std::span<const Point2> points, const Point2& anchor,
                                   double tol);

/// First n measurements (points, schedule, ranges) of s; anchors are kept.
Scenario prefix(const Scenario& s, std::size_t n);

}  // namespace constructa
