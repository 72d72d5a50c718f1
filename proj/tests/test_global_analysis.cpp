#include <gtest/gtest.h>

#include <cmath>

#include "constructa/error.hpp"
#include "constructa/global_analysis.hpp"
#include "constructa/oracle.hpp"
#include "fixtures.hpp"

using namespace constructa;
using constructa::fixtures::Rng;

namespace {

const fixtures::Fixture& fixture(const std::string& name) {
  static const auto all = fixtures::taxonomy_fixtures();
  for (const auto& f : all) {
    if (f.name == name) return f;
  }
  throw std::runtime_error("no fixture " + name);
}

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kParseError;
}

// Reflection across the x axis applied to a transform's image: if T is a
// solution of a layout whose anchors lie on the x axis, so is the mirrored
// placement of the mirrored trajectory.
RigidTransform2 mirrored(const RigidTransform2& t) { return {t.dx, -t.dy, -t.phi}; }

}  // namespace

TEST(DeltaAngle, Examples) {
  const auto right = delta_angle(1, 1, std::sqrt(2.0));
  ASSERT_EQ(right.size(), 2u);
  EXPECT_NEAR(right[0], kPi / 2, 1e-12);
  EXPECT_NEAR(right[1], -kPi / 2, 1e-12);
  // Brute force: P0 at (1, 0), P1 on the unit circle at distance sqrt(2).
  for (double d : right) {
    const Point2 p1 = unit_vector(d);
    EXPECT_NEAR((p1 - Point2(1, 0)).norm(), std::sqrt(2.0), 1e-12);
  }
  EXPECT_EQ(delta_angle(1, 2, 1), std::vector<double>{0.0});
  EXPECT_EQ(delta_angle(1, 2, 3), std::vector<double>{kPi});
  EXPECT_TRUE(delta_angle(1, 1, 3).empty());
  EXPECT_EQ(error_of([] { delta_angle(0, 1, 1); }), ErrorCode::kNonPositiveInput);
  EXPECT_EQ(error_of([] { delta_angle(1, 1, -1); }), ErrorCode::kNonPositiveInput);
}

TEST(DeltaAngle, MatchesPlacementProperty) {
  Rng rng(60);
  for (int i = 0; i < 500; ++i) {
    const double r0 = rng.uniform(0.1, 5), r1 = rng.uniform(0.1, 5);
    const double s = rng.uniform(std::abs(r0 - r1) + 1e-3, r0 + r1 - 1e-3);
    const auto ds = delta_angle(r0, r1, s);
    ASSERT_EQ(ds.size(), 2u);
    for (double d : ds) EXPECT_NEAR((r1 * unit_vector(d) - Point2(r0, 0)).norm(), s, 1e-9);
  }
}

TEST(SingleAnchor, Examples) {
  const Point2 o(0, 0);
  const std::vector<Point2> one{{1, 0}};
  const std::vector<Point2> diameter{{1, 0}, {2, 0}};
  const std::vector<Point2> general{{1, 0}, {2, 0}, {2, 1}};
  const std::vector<Point2> c2{{1, 0}, {2, 1}};
  EXPECT_EQ(single_anchor_family(one, o, 1e-9), IndClass::family(2, 1));
  EXPECT_EQ(single_anchor_family(diameter, o, 1e-9), IndClass::family(1, 1));
  EXPECT_EQ(single_anchor_family(general, o, 1e-9), IndClass::family(1, 1));
  EXPECT_EQ(single_anchor_family(c2, o, 1e-9), IndClass::family(1, 2));
}

TEST(SingleAnchor, ScenarioForm) {
  EXPECT_EQ(single_anchor_family(fixture("C1").scenario), IndClass::family(2, 1));
  EXPECT_EQ(single_anchor_family(fixture("C2").scenario), IndClass::family(1, 2));
  EXPECT_EQ(single_anchor_family(fixture("C3").scenario), IndClass::family(1, 1));
  // World points collinear with the anchor: one family.
  const Scenario diam = fixtures::make_scenario({{0, 0}}, {{1, 0}, {2, 0}}, {1, 1}, RigidTransform2(-1, 0, 0));
  EXPECT_EQ(single_anchor_family(diam), IndClass::family(1, 1));
  EXPECT_EQ(error_of([] { single_anchor_family(fixture("1+1").scenario); }), ErrorCode::kMixedAnchors);
}

TEST(OnePlusOne, GenericFamily) {
  const Scenario& s = fixture("1+1").scenario;
  const auto fam = solve_1p1(s, 60);
  EXPECT_EQ(fam.ind, IndClass::family(1, 2));
  ASSERT_EQ(fam.samples.size(), 60u);
  for (const auto& smp : fam.samples) {
    EXPECT_FALSE(smp.transforms.empty());
    for (const auto& t : smp.transforms) EXPECT_LE(fixtures::ref_max_residual(s, t), 1e-9);
  }
}

TEST(OnePlusOne, ResidualProperty) {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const auto anchors = fixtures::separated_points(rng, 2, 0, 10, 0.5);
    const auto pts = fixtures::separated_points(rng, 2, 0, 10, 0.5, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, {1, 2}, rng.transform(3));
    const auto fam = solve_1p1(s, 40);
    for (const auto& smp : fam.samples) {
      for (const auto& t : smp.transforms) EXPECT_LE(fixtures::ref_max_residual(s, t), 1e-9);
    }
  }
}

TEST(OnePlusOne, Case1IsUnique) {
  const Scenario s = fixtures::case1_fixture();
  const auto fam = solve_1p1(s, 40);
  EXPECT_EQ(fam.ind, IndClass::finite(1));
  ASSERT_EQ(fam.samples.size(), 1u);
  ASSERT_FALSE(fam.samples[0].transforms.empty());
  EXPECT_TRUE(fixtures::ref_same(fam.samples[0].transforms[0], *s.truth, 1e-6, 1e-6));
}

TEST(OnePlusOne, WrongDistribution) {
  EXPECT_EQ(error_of([] { solve_1p1(fixture("2+1").scenario, 10); }), ErrorCode::kWrongDistribution);
}

TEST(TwoPlusOne, GenericFour) {
  const Scenario& s = fixture("2+1").scenario;
  const SolutionSet ss = solve_2p1(s, SolverConfig::for_scenario(s));
  EXPECT_EQ(ss.size(), 4u);
  for (const auto& sol : ss.solutions) EXPECT_LE(fixtures::ref_max_residual(s, sol.transform), 1e-9);
  EXPECT_TRUE(compare_solution_sets(ss, brute_force_oracle(s, SolverConfig::for_scenario(s)), 1e-5, 1e-5).agree);
}

TEST(TwoPlusOne, TangentCollapses) {
  const Scenario s = fixtures::case3_fixture();
  const SolutionSet ss = solve_2p1(s, SolverConfig::for_scenario(s));
  ASSERT_EQ(ss.size(), 1u);
  EXPECT_LE(fixtures::ref_max_residual(s, ss.solutions[0].transform), 1e-9);
}

TEST(TwoPlusOne, CollinearPairIsDegenerate) {
  const Scenario s = fixtures::make_scenario({{0, 0}, {6, 1}}, {{1, 0}, {2, 0}, {3, 3}}, {1, 1, 2}, RigidTransform2(1, 0, 0));
  EXPECT_EQ(error_of([&] { solve_2p1(s, SolverConfig::for_scenario(s)); }), ErrorCode::kDegenerateInput);
  // The global analysis falls back and still finds every solution.
  const GlobalAnalysis ga = analyze_global(s, SolverConfig::for_scenario(s));
  EXPECT_TRUE(compare_solution_sets(ga.solutions, solve_multistart(s, SolverConfig::for_scenario(s)), 1e-5, 1e-5).agree);
}

TEST(TwoPlusOne, WrongDistribution) {
  EXPECT_EQ(error_of([] { solve_2p1(fixture("3+1").scenario, {}); }), ErrorCode::kWrongDistribution);
}

TEST(ThreePlusOne, GenericTwoReflected) {
  // Anchors on the x axis so the reflection across their line is y -> -y.
  const Scenario s = fixtures::make_scenario({{0, 0}, {6, 0}}, {{1, 0}, {2, 1}, {0, 2}, {3, 3}}, {1, 1, 1, 2});
  const SolutionSet ss = solve_3p1(s, SolverConfig::for_scenario(s));
  ASSERT_EQ(ss.size(), 2u);
  // Reflect the world placement of every point of solution 0 across the
  // anchor line; it must coincide with solution 1's placement up to the
  // vehicle-frame reflection, i.e. identical ranges and reflected points.
  const auto& t0 = ss.solutions[0].transform;
  const auto& t1 = ss.solutions[1].transform;
  const Point2 a(0, 0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Point2 p0 = apply_transform(t0, s.point(k));
    const Point2 p1 = apply_transform(t1, s.point(k));
    EXPECT_NEAR((p0 - a).norm(), (p1 - a).norm(), 1e-9);
  }
  const Point2 w0 = apply_transform(t0, s.point(3));
  const Point2 w1 = apply_transform(t1, s.point(3));
  EXPECT_NEAR(w0.x(), w1.x(), 1e-9);
  EXPECT_NEAR(w0.y(), -w1.y(), 1e-9);
}

TEST(ThreePlusOne, TangentCollapses) {
  const Scenario s = fixtures::case4_fixture();
  const SolutionSet ss = solve_3p1(s, SolverConfig::for_scenario(s));
  ASSERT_EQ(ss.size(), 1u);
  EXPECT_TRUE(fixtures::ref_same(ss.solutions[0].transform, *s.truth, 1e-6, 1e-6));
}

TEST(OnePlusOnePlusOne, BoundAndOracleProperty) {
  Rng rng(62);
  for (int trial = 0; trial < 25; ++trial) {
    const auto anchors = fixtures::separated_points(rng, 3, 0, 10, 0.1);
    const auto pts = fixtures::separated_points(rng, 3, 0, 10, 0.1, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, {1, 2, 3}, rng.transform(2));
    const SolverConfig cfg = SolverConfig::for_scenario(s);
    const SolutionSet ss = solve_1p1p1(s, cfg);
    EXPECT_GE(ss.size(), 1u);
    EXPECT_LE(ss.size(), 8u);
    for (const auto& sol : ss.solutions) EXPECT_LE(fixtures::ref_max_residual(s, sol.transform), 1e-9);
    const Agreement ag = compare_solution_sets(ss, brute_force_oracle(s, cfg), 1e-5, 1e-5);
    EXPECT_TRUE(ag.agree) << "trial " << trial << ": " << ag.detail;
  }
}

TEST(OnePlusOnePlusOne, ManySolutionsExist) {
  // Searching random layouts finds configurations with more than four
  // isolated placements.
  Rng rng(63);
  std::size_t best = 0;
  for (int trial = 0; trial < 300 && best < 6; ++trial) {
    const auto anchors = fixtures::separated_points(rng, 3, 0, 10, 0.1);
    const auto pts = fixtures::separated_points(rng, 3, 0, 10, 0.1, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, {1, 2, 3}, rng.transform(2));
    best = std::max(best, solve_1p1p1(s, SolverConfig::for_scenario(s)).size());
  }
  EXPECT_GE(best, 6u);
  EXPECT_LE(best, 8u);
}

TEST(Locus, DomainEndpointsAreTangencies) {
  const Scenario& s = fixture("1+1+1").scenario;
  const Locus l = emit_locus_1p1p1(s, 400);
  EXPECT_EQ(l.branch_a.size(), 400u);
  EXPECT_EQ(l.branch_b.size(), 400u);
  // Independent check: at an endpoint, circle(P0, s01) and circle(B2, r1) touch.
  const double s01 = (s.point(1) - s.point(0)).norm();
  const auto& rho = *s.rho;
  const Point2 b1 = s.anchors[0].position, b2 = s.anchors[1].position;
  auto gap = [&](double phi) {
    const double d = (b2 - (b1 + rho[0] * unit_vector(phi))).norm();
    return std::min(std::abs(d - (s01 + rho[1])), std::abs(d - std::abs(s01 - rho[1])));
  };
  for (const auto& arc : l.arcs) {
    if (arc.hi - arc.lo >= kTwoPi - 1e-12) continue;
    EXPECT_LT(gap(arc.lo), 1e-10);
    EXPECT_LT(gap(arc.hi), 1e-10);
  }
}

TEST(Locus, BranchesMergeAtEndpoints) {
  const Scenario& s = fixture("1+1+1").scenario;
  const Locus l = emit_locus_1p1p1(s, 200);
  ASSERT_FALSE(l.branch_a.empty());
  const auto& a0 = l.branch_a.front();
  const auto& b0 = l.branch_b.front();
  EXPECT_LT((a0.p2 - b0.p2).norm(), 1e-6);
  EXPECT_LT((l.branch_a.back().p2 - l.branch_b.back().p2).norm(), 1e-6);
  // Continuity: consecutive samples on one arc are close.
  for (std::size_t i = 1; i < l.branch_a.size(); ++i) {
    if (l.branch_a[i].arc != l.branch_a[i - 1].arc) continue;
    EXPECT_LT((l.branch_a[i].p2 - l.branch_a[i - 1].p2).norm(), 1.0);
  }
}

TEST(Locus, EmptyDomain) {
  Scenario s = fixture("1+1+1").scenario;
  (*s.rho)[1] = 100.0;
  EXPECT_EQ(error_of([&] { emit_locus_1p1p1(s, 10); }), ErrorCode::kEmptyDomain);
}

TEST(Taxonomy, Examples) {
  const auto t31 = taxonomy_classify(fixture("3+1").scenario);
  EXPECT_EQ(t31.distribution_str(), "3+1");
  EXPECT_EQ(t31.verdict, Verdict::kUnconstructible);
  EXPECT_EQ(t31.ind, IndClass::finite(2));

  const auto t22 = taxonomy_classify(fixture("2+2").scenario);
  EXPECT_EQ(t22.verdict, Verdict::kConstructibleGeneric);
  EXPECT_EQ(t22.ind, IndClass::finite(1));

  const auto t11 = taxonomy_classify(fixtures::case1_fixture());
  EXPECT_EQ(t11.distribution_str(), "1+1");
  EXPECT_EQ(t11.verdict, Verdict::kDegenerateConstructible);
  EXPECT_EQ(t11.ind, IndClass::finite(1));
}

TEST(Taxonomy, EveryFixture) {
  for (const auto& f : fixtures::taxonomy_fixtures()) {
    const auto t = taxonomy_classify(f.scenario);
    // Single-anchor fixtures are named by class; C1/C2/C3 carry 1/2/3 informative measurements.
    const std::string want = f.name[0] == 'C' ? f.name.substr(1) : f.name;
    EXPECT_EQ(t.distribution_str(), want);
    EXPECT_EQ(t.ind, f.expected) << f.name << " got " << t.ind.str();
  }
}

TEST(Taxonomy, InvariantUnderRigidMotion) {
  Rng rng(64);
  for (const auto& f : fixtures::taxonomy_fixtures()) {
    const RigidTransform2 g = rng.transform(5);
    Scenario moved = f.scenario;
    for (auto& a : moved.anchors) a.position = apply_transform(g, a.position);
    fixtures::resynthesize(moved, compose(g, *f.scenario.truth));
    const auto a = taxonomy_classify(f.scenario);
    const auto b = taxonomy_classify(moved);
    EXPECT_EQ(a.verdict, b.verdict) << f.name;
    EXPECT_EQ(a.ind, b.ind) << f.name;
  }
}

TEST(Taxonomy, TwoAnchorReflectionSymmetry) {
  // Anchors on the x axis; mirror each solution's world placement.
  Rng rng(65);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<Point2> anchors{{0, 0}, {rng.uniform(3, 8), 0}};
    const auto pts = fixtures::separated_points(rng, 4, -5, 5, 0.5, anchors);
    const std::vector<std::vector<int>> scheds{{1, 1, 2}, {1, 1, 1, 2}};
    const auto& sched = scheds[static_cast<std::size_t>(trial % 2)];
    std::vector<Point2> p(pts.begin(), pts.begin() + static_cast<long>(sched.size()));
    const Scenario s = fixtures::make_scenario(anchors, p, sched, rng.transform(2));
    // Mirrored trajectory: reflect the vehicle frame too.
    Scenario m = s;
    for (auto& q : m.trajectory.points) q.y() = -q.y();
    const SolverConfig cfg = SolverConfig::for_scenario(s);
    const SolutionSet a = analyze_global(s, cfg).solutions;
    const SolutionSet b = analyze_global(m, cfg).solutions;
    ASSERT_EQ(a.size(), b.size());
    for (const auto& sol : a.solutions) {
      bool found = false;
      for (const auto& other : b.solutions) found = found || fixtures::ref_same(mirrored(sol.transform), other.transform, 1e-6, 1e-6);
      EXPECT_TRUE(found);
    }
  }
}

TEST(Pathologies, Constructions) {
  for (bool third : {false, true}) {
    const Scenario r = fixtures::rotation_pathology_fixture(third);
    const GlobalAnalysis gr = analyze_global(r, SolverConfig::for_scenario(r));
    EXPECT_TRUE(gr.flags.pathological_rotation);
    EXPECT_GE(gr.solutions.size(), 2u);
    EXPECT_EQ(gr.taxonomy.verdict, Verdict::kPathologicalUnconstructible);

    const Scenario t = fixtures::translation_pathology_fixture(third);
    const GlobalAnalysis gt = analyze_global(t, SolverConfig::for_scenario(t));
    EXPECT_TRUE(gt.flags.pathological_translation);
    EXPECT_GE(gt.solutions.size(), 2u);
  }
}

TEST(Pathologies, GenericScenariosHaveNoFlags) {
  Rng rng(66);
  const std::vector<std::vector<int>> scheds{{1, 1, 2, 2}, {1, 1, 2, 3}, {1, 1, 1, 2, 2}, {1, 2, 3, 4}};
  for (int trial = 0; trial < 12; ++trial) {
    const auto& sched = scheds[static_cast<std::size_t>(trial) % scheds.size()];
    const int n = *std::max_element(sched.begin(), sched.end());
    const auto anchors = fixtures::separated_points(rng, n, 0, 10, 0.5);
    const auto pts = fixtures::separated_points(rng, static_cast<int>(sched.size()), 0, 10, 0.5, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, sched, rng.transform(2));
    const GlobalAnalysis ga = analyze_global(s, SolverConfig::for_scenario(s));
    EXPECT_FALSE(ga.flags.any_case() || ga.flags.any_pathology()) << "trial " << trial;
    EXPECT_EQ(ga.solutions.size(), 1u) << "trial " << trial;
  }
}

TEST(Degenerate, CaseFlags) {
  auto flags = [](const Scenario& s) { return analyze_global(s, SolverConfig::for_scenario(s)); };
  const auto c1 = flags(fixtures::case1_fixture());
  EXPECT_TRUE(c1.flags.case1_straight);
  EXPECT_EQ(c1.taxonomy.ind, IndClass::finite(1));
  const auto c2 = flags(fixtures::case2_fixture());
  EXPECT_TRUE(c2.flags.case2_tangent_locus);
  EXPECT_EQ(c2.taxonomy.ind, IndClass::finite(1));
  const auto c3 = flags(fixtures::case3_fixture());
  EXPECT_TRUE(c3.flags.case3_tangent_circles);
  EXPECT_EQ(c3.taxonomy.ind, IndClass::finite(1));
  const auto c4 = flags(fixtures::case4_fixture());
  EXPECT_TRUE(c4.flags.case4_tangent_3p1);
  EXPECT_EQ(c4.taxonomy.ind, IndClass::finite(1));
  for (const auto* g : {&c1, &c2, &c3, &c4}) EXPECT_EQ(g->taxonomy.verdict, Verdict::kDegenerateConstructible);
}

TEST(VirtualAnchor, Candidates) {
  const Scenario& s = fixture("3+1").scenario;
  const auto groups = group_by_anchor(s);
  const auto c3 = virtual_anchor_candidates(s, groups[0]);
  ASSERT_TRUE(c3.has_value());
  ASSERT_EQ(c3->size(), 1u);
  const Point2 expected = apply_transform(inverse(*s.truth), s.anchors[0].position);
  EXPECT_LT(((*c3)[0] - expected).norm(), 1e-9);
  EXPECT_FALSE(virtual_anchor_candidates(s, groups[1]).has_value());

  const Scenario& s2 = fixture("2+1").scenario;
  const auto c2 = virtual_anchor_candidates(s2, group_by_anchor(s2)[0]);
  ASSERT_TRUE(c2.has_value());
  ASSERT_EQ(c2->size(), 2u);
  const Point2 truth_v = apply_transform(inverse(*s2.truth), s2.anchors[0].position);
  EXPECT_LT(std::min(((*c2)[0] - truth_v).norm(), ((*c2)[1] - truth_v).norm()), 1e-9);
}

TEST(ClosedForm, MatchesMultistartOnRandomConstructible) {
  Rng rng(67);
  const std::vector<std::vector<int>> scheds{{1, 1, 2, 2}, {1, 1, 2, 3}, {1, 1, 1, 2, 3}, {1, 2, 3, 4}, {1, 1, 1, 2, 2}};
  for (int trial = 0; trial < 15; ++trial) {
    const auto& sched = scheds[static_cast<std::size_t>(trial) % scheds.size()];
    const int n = *std::max_element(sched.begin(), sched.end());
    const auto anchors = fixtures::separated_points(rng, n, 0, 10, 0.5);
    const auto pts = fixtures::separated_points(rng, static_cast<int>(sched.size()), 0, 10, 0.5, anchors);
    const Scenario s = fixtures::make_scenario(anchors, pts, sched, rng.transform(2));
    const SolverConfig cfg = SolverConfig::for_scenario(s);
    const SolutionSet cf = solve_closed_form(s, cfg);
    const Agreement ag = compare_solution_sets(cf, solve_multistart(s, cfg), 1e-5, 1e-5);
    EXPECT_TRUE(ag.agree) << "trial " << trial << ": " << ag.detail;
  }
}
