#pragma once

// Scenario builders, hand-rolled generators and independent reference
// computations shared by the unit tests and the acceptance binary. Nothing
// here calls into the library's solvers.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "constructa/geom.hpp"
#include "constructa/scenario.hpp"
#include "constructa/solver.hpp"

namespace constructa::fixtures {

/// Anchors get ids 1..n in order; schedule entries are those ids. Ranges are
/// synthesized exactly from `truth`, which is also recorded.
Scenario make_scenario(const std::vector<Point2>& anchors, const std::vector<Point2>& points,
                       const std::vector<int>& schedule,
                       const RigidTransform2& truth = RigidTransform2(1.0, 2.0, 0.7));

/// Exact ranges recomputed for a new truth.
void resynthesize(Scenario& s, const RigidTransform2& truth);

struct Fixture {
  std::string name;
  Scenario scenario;
  IndClass expected;
};

/// One scenario per row of the indistinguishability table: single-anchor
/// C1/C2/C3, 1+1, 2+1, 3+1, 1+1+1, 2+2, 2+1+1, 3+2, 3+1+1, 1+1+1+1.
std::vector<Fixture> taxonomy_fixtures();

/// Measurement points on the anchor line (two anchors, one point each).
Scenario case1_fixture();
/// 1+1+1 whose third range equals the minimum distance from the third anchor
/// to the locus of the third point.
Scenario case2_fixture();
/// 2+1 with the second anchor's circle tangent to the virtual-anchor circle.
Scenario case3_fixture();
/// 3+1 with d3 = D + rho3.
Scenario case4_fixture();

/// Rotation symmetry about a C3 pivot: the other anchors' points lie on a line
/// through the pivot and those anchors lie on one line through the pivot.
Scenario rotation_pathology_fixture(bool third_anchor);
/// Translation symmetry: every anchor sits at the same offset from one
/// common measurement line.
Scenario translation_pathology_fixture(bool third_anchor);

/// Unicycle-generated scenario with a recorded truth.
Scenario unicycle_fixture(std::uint64_t seed, int measurements, int anchors);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Point2 point(double half) { return {uniform(-half, half), uniform(-half, half)}; }
  Point2 point_in(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi)}; }
  RigidTransform2 transform(double half) { return {uniform(-half, half), uniform(-half, half), uniform(-kPi, kPi)}; }

 private:
  std::mt19937_64 gen_;
};

/// Points whose pairwise distances are all at least `sep`, drawn from the box
/// [lo, hi]^2, none closer than `sep` to `avoid`.
std::vector<Point2> separated_points(Rng& rng, int n, double lo, double hi, double sep,
                                     const std::vector<Point2>& avoid = {});

// Reference computations, written without the library's geometry helpers.

/// Intersection points of two circles from the angle at a's center.
std::vector<Point2> ref_circle_points(const Point2& ca, double ra, const Point2& cb, double rb);

/// Least-squares rigid registration (2-D Kabsch) of vehicle points onto world points.
RigidTransform2 ref_register(const std::vector<Point2>& v, const std::vector<Point2>& w);

/// Max |range(t) - rho| over all measurements.
double ref_max_residual(const Scenario& s, const RigidTransform2& t);

/// Transforms equal within tolerances on (dx, dy) and wrapped phi.
bool ref_same(const RigidTransform2& a, const RigidTransform2& b, double tol_m, double tol_rad);

/// Smallest singular value of the residual Jacobian, by finite differences.
double ref_min_singular(const Scenario& s, const RigidTransform2& t);

/// Gramian computed column by column from finite-difference range gradients
/// with respect to the final pose.
Eigen::Matrix3d ref_gramian(const Scenario& s, const RigidTransform2& t);

/// Rank of a PSD matrix by eigenvalues above rel * lambda_max.
int ref_rank(const Eigen::Matrix3d& m, double rel = 1e-8);

}  // namespace constructa::fixtures
