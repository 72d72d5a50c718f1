#pragma once

#include <optional>
#include <string>
#include <vector>

#include "constructa/geom.hpp"
#include "constructa/scenario.hpp"
#include "constructa/unicycle.hpp"

namespace constructa {

/// Rank-one Gramian term of one range measurement, expressed over the final
/// state (x_f, y_f, theta_f).
struct GramianContribution {
  Vector3 gamma = Vector3::Zero();  // [cos alpha, sin alpha, p]
  SymMat3 matrix;
  double alpha = 0.0;
  double p = 0.0;  // signed distance of the final point from the measurement ray
};

enum class WeakVerdict { kWeaklyConstructible, kWeaklyUnconstructible };

const char* to_string(WeakVerdict v);

struct GramianReport {
  SymMat3 gramian;
  Vector3 eigenvalues = Vector3::Zero();  // ascending
  int rank = 0;
  double min_eig = 0.0;
  std::vector<Vector3> null_basis;
  WeakVerdict verdict = WeakVerdict::kWeaklyUnconstructible;
};

/// Error(kZeroRange) when the measurement point sits on the anchor.
GramianContribution gramian_contribution(const Point2& p_k, const Point2& anchor,
                                         const Point2& p_f);

/// Eigen-decomposes a Gramian; eigenvalues below rank_tol * lambda_max are zero.
GramianReport analyze_gramian(const SymMat3& g, double rank_tol = 1e-8);

/// Closed-form Gramian at transform t. The final point defaults to the last
/// world-frame measurement point. Anchor weights scale their contributions.
GramianReport build_gramian(const Scenario& s, const RigidTransform2& t,
                            std::optional<Point2> final_point = std::nullopt);

/// Sum over measurements of w Phi^T H^T H Phi with Phi from the unicycle
/// variational equation, started at the pose given by t. Needs the scenario's
/// sample times; Error(kInconsistentControls) when the controls do not
/// reproduce the transformed points within 1e-9.
SymMat3 numerical_gramian(const UnicycleControls& controls, const Scenario& s,
                          const RigidTransform2& t);

enum class DirectionKind { kRotationAboutAnchor, kRotationAboutPoint, kUnclassified };

const char* to_string(DirectionKind k);

struct SingularDirection {
  Vector3 direction = Vector3::Zero();  // unit vector in the null space
  DirectionKind kind = DirectionKind::kUnclassified;
  int index = -1;  // anchor id or measurement index
  std::string description;
};

/// Tags a basis of the Gramian null space with the rigid motions that
/// generate it. Empty for a full-rank report.
std::vector<SingularDirection> singular_direction_report(const GramianReport& report,
                                                         const Scenario& s,
                                                         const RigidTransform2& t);

/// Locus of third measurement points P2 (ranged from b3) that make the
/// 1+1+1 Gramian singular: the line through b3 and the crossing of the
/// measurement rays b1-p0 and b2-p1. Error(kDegeneratePrefix) when those rays
/// are parallel or cross at b3.
Line2 critical_line_1p1p1_local(const Point2& b1, const Point2& b2, const Point2& b3,
                                const Point2& p0, const Point2& p1);

}  // namespace constructa
