#include <gtest/gtest.h>

#include <cmath>

#include "constructa/error.hpp"
#include "constructa/local_analysis.hpp"
#include "fixtures.hpp"

using namespace constructa;
using constructa::fixtures::Rng;

namespace {

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kParseError;
}

double rel_diff(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(GramianContribution, Example) {
  // Anchor at the origin, point at (3, 4), final point at (3, 0).
  const auto c = gramian_contribution({3, 4}, {0, 0}, {3, 0});
  EXPECT_NEAR(c.gamma(0), 0.6, 1e-15);
  EXPECT_NEAR(c.gamma(1), 0.8, 1e-15);
  // d range / d theta about the final point: (P - Pf) rotated a quarter turn, dotted with u.
  const Point2 u(0.6, 0.8);
  EXPECT_NEAR(c.gamma(2), perp(Point2(0, 4)).dot(u), 1e-15);
  EXPECT_NEAR(c.matrix(2, 2), c.gamma(2) * c.gamma(2), 1e-15);
  EXPECT_EQ(error_of([] { gramian_contribution({1, 1}, {1, 1}, {0, 0}); }), ErrorCode::kZeroRange);
}

TEST(GramianContribution, RankOne) {
  Rng rng(80);
  for (int i = 0; i < 200; ++i) {
    const auto c = gramian_contribution(rng.point(5), rng.point(5), rng.point(5));
    EXPECT_EQ(fixtures::ref_rank(c.matrix.matrix()), 1);
    EXPECT_NEAR(c.gamma.head<2>().norm(), 1.0, 1e-12);
  }
}

TEST(AnalyzeGramian, RankAndNullBasis) {
  Eigen::Matrix3d m = Eigen::Vector3d(1, 0, 0) * Eigen::RowVector3d(1, 0, 0) +
                      Eigen::Vector3d(0, 1, 1) * Eigen::RowVector3d(0, 1, 1);
  const auto r = analyze_gramian(SymMat3(m));
  EXPECT_EQ(r.rank, 2);
  EXPECT_EQ(r.verdict, WeakVerdict::kWeaklyUnconstructible);
  ASSERT_EQ(r.null_basis.size(), 1u);
  EXPECT_NEAR((m * r.null_basis[0]).norm(), 0.0, 1e-12);
  EXPECT_LE(r.eigenvalues(0), r.eigenvalues(1));
  EXPECT_LE(r.eigenvalues(1), r.eigenvalues(2));
  const auto full = analyze_gramian(SymMat3(Eigen::Matrix3d::Identity()));
  EXPECT_EQ(full.rank, 3);
  EXPECT_EQ(full.verdict, WeakVerdict::kWeaklyConstructible);
  EXPECT_TRUE(full.null_basis.empty());
  EXPECT_EQ(analyze_gramian(SymMat3()).rank, 0);
}

TEST(BuildGramian, MatchesFiniteDifferenceReference) {
  Rng rng(81);
  const std::vector<std::vector<int>> scheds{{1, 1, 2, 2}, {1, 2, 3}, {1, 1, 1, 2, 3}};
  for (int trial = 0; trial < 30; ++trial) {
    const auto& sched = scheds[static_cast<std::size_t>(trial) % scheds.size()];
    const int n = *std::max_element(sched.begin(), sched.end());
    const auto anchors = fixtures::separated_points(rng, n, 0, 10, 0.5);
    const auto pts = fixtures::separated_points(rng, static_cast<int>(sched.size()), 0, 10, 0.5, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, sched, rng.transform(2));
    const auto rep = build_gramian(s, *s.truth);
    EXPECT_LT(rel_diff(rep.gramian.matrix(), fixtures::ref_gramian(s, *s.truth)), 1e-7);
    EXPECT_EQ(rep.rank, fixtures::ref_rank(rep.gramian.matrix()));
  }
}

TEST(BuildGramian, RankInvariantUnderFinalPoint) {
  // Moving the reference point changes coordinates by an invertible map.
  Rng rng(82);
  for (int trial = 0; trial < 20; ++trial) {
    const auto anchors = fixtures::separated_points(rng, 2, 0, 10, 0.5);
    const auto pts = fixtures::separated_points(rng, 4, 0, 10, 0.5, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, {1, 1, 2, 2}, rng.transform(2));
    const auto a = build_gramian(s, *s.truth);
    const auto b = build_gramian(s, *s.truth, rng.point(10));
    EXPECT_EQ(a.rank, b.rank);
  }
}

TEST(BuildGramian, WeightsScale) {
  Scenario s = fixtures::make_scenario({{0, 0}, {6, 1}}, {{1, 0}, {2, 1}, {0, 2}, {3, 3}}, {1, 1, 2, 2});
  const auto base = build_gramian(s, *s.truth).gramian.matrix();
  for (auto& a : s.anchors) a.weight = 2.5;
  EXPECT_LT(rel_diff(build_gramian(s, *s.truth).gramian.matrix(), 2.5 * base), 1e-14);
}

TEST(NumericalGramian, MatchesClosedFormOnUnicycleTrajectories) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Scenario s = fixtures::unicycle_fixture(900 + seed, 6, 3);
    const SymMat3 num = numerical_gramian(*s.controls, s, *s.truth);
    const auto closed = build_gramian(s, *s.truth);
    EXPECT_LT(rel_diff(num.matrix(), closed.gramian.matrix()), 1e-6) << "seed " << seed;
  }
}

TEST(NumericalGramian, InconsistentControls) {
  Scenario s = fixtures::unicycle_fixture(7, 5, 2);
  s.trajectory.points[2].x() += 0.1;
  EXPECT_EQ(error_of([&] { numerical_gramian(*s.controls, s, *s.truth); }), ErrorCode::kInconsistentControls);
}

TEST(RankCatalogue, SingleAnchorRotation) {
  const Scenario s = fixtures::make_scenario({{0, 0}}, {{1, 0}, {2, 1}, {0, 2}}, {1, 1, 1});
  const auto rep = build_gramian(s, *s.truth);
  EXPECT_EQ(rep.rank, 2);
  const auto dirs = singular_direction_report(rep, s, *s.truth);
  ASSERT_EQ(dirs.size(), 1u);
  EXPECT_EQ(dirs[0].kind, DirectionKind::kRotationAboutAnchor);
  EXPECT_EQ(dirs[0].index, 1);
}

TEST(RankCatalogue, OnePlusOneCollinear) {
  // Both measurement points on the anchor line: only motion along it is seen.
  const Scenario s = fixtures::make_scenario({{0, 0}, {10, 0}}, {{3, 0}, {6, 0}}, {1, 2}, RigidTransform2(0, 0, 0));
  const auto rep = build_gramian(s, *s.truth);
  EXPECT_EQ(rep.rank, 1);
  const auto dirs = singular_direction_report(rep, s, *s.truth);
  ASSERT_EQ(dirs.size(), 2u);
  for (const auto& d : dirs) EXPECT_EQ(d.kind, DirectionKind::kRotationAboutAnchor);
}

TEST(RankCatalogue, OnePlusOnePlusOneLine) {
  Rng rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const auto anchors = fixtures::separated_points(rng, 3, 0, 10, 1.0);
    const auto pts = fixtures::separated_points(rng, 2, 0, 10, 1.0, anchors);
    const RigidTransform2 truth = rng.transform(2);
    const Point2 w0 = apply_transform(truth, pts[0]);
    const Point2 w1 = apply_transform(truth, pts[1]);
    Line2 line;
    try {
      line = critical_line_1p1p1_local(anchors[0], anchors[1], anchors[2], w0, w1);
    } catch (const Error&) {
      continue;
    }
    // P2 on the line, in the vehicle frame.
    const Point2 w2 = line.at(rng.uniform(2, 5));
    const Point2 p2 = apply_transform(inverse(truth), w2);
    const Scenario on = fixtures::make_scenario(anchors, {pts[0], pts[1], p2}, {1, 2, 3}, truth);
    EXPECT_EQ(fixtures::ref_rank(fixtures::ref_gramian(on, truth), 1e-6), 2);
    EXPECT_EQ(build_gramian(on, truth).rank, 2);
    const Point2 off_w = w2 + 0.5 * line.normal();
    const Scenario off = fixtures::make_scenario(anchors, {pts[0], pts[1], apply_transform(inverse(truth), off_w)},
                                                {1, 2, 3}, truth);
    EXPECT_EQ(build_gramian(off, truth).rank, 3);
  }
}

TEST(CriticalLineLocal, DegeneratePrefix) {
  // Parallel rays.
  EXPECT_EQ(error_of([] { critical_line_1p1p1_local({0, 0}, {0, 1}, {5, 5}, {1, 0}, {1, 1}); }),
            ErrorCode::kDegeneratePrefix);
  // Rays crossing at b3.
  EXPECT_EQ(error_of([] { critical_line_1p1p1_local({0, 0}, {2, 0}, {1, 1}, {2, 2}, {0, 2}); }),
            ErrorCode::kDegeneratePrefix);
}

TEST(RankCatalogue, GenericConstructibleIsFullRank) {
  for (const auto& f : fixtures::taxonomy_fixtures()) {
    if (f.expected != IndClass::finite(1)) continue;
    EXPECT_EQ(build_gramian(f.scenario, *f.scenario.truth).rank, 3) << f.name;
  }
}
