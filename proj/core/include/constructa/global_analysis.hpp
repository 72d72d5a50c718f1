#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "constructa/geom.hpp"
#include "constructa/scenario.hpp"
#include "constructa/solver.hpp"

namespace constructa {

enum class Verdict {
  kUnconstructible,
  kConstructibleGeneric,
  kDegenerateConstructible,
  kPathologicalUnconstructible,
};

const char* to_string(Verdict v);

struct TaxonomyClass {
  std::vector<int> distribution;  // informative counts per anchor, descending
  Verdict verdict = Verdict::kUnconstructible;
  IndClass ind;

  /// "a+b+..." rendering of the distribution.
  std::string distribution_str() const;
};

struct DegenerateFlags {
  bool case1_straight = false;
  bool case2_tangent_locus = false;
  bool case3_tangent_circles = false;
  bool case4_tangent_3p1 = false;
  bool pathological_rotation = false;
  bool pathological_translation = false;

  bool any_case() const {
    return case1_straight || case2_tangent_locus || case3_tangent_circles || case4_tangent_3p1;
  }
  bool any_pathology() const { return pathological_rotation || pathological_translation; }
};

/// Angle at the anchor between two measurement points at ranges rho0, rho1
/// that are s01 apart: empty when no triangle exists, one value on the
/// diameter, otherwise {+delta, -delta}. Error(kNonPositiveInput) for
/// non-positive inputs.
std::vector<double> delta_angle(double rho0, double rho1, double s01, double tol = 1e-9);

/// Family of transforms for measurements of a single anchor. The points are
/// world-frame positions; the diameter case (points collinear with the
/// anchor) yields a single family.
IndClass single_anchor_family(std::span<const Point2> points, const Point2& anchor, double tol);

/// Same from a scenario whose schedule uses a single anchor, using the
/// ranges to decide the diameter case. Error(kMixedAnchors) otherwise.
IndClass single_anchor_family(const Scenario& s);

/// An arc [lo, hi] of admissible polar angles of P0 around the first anchor.
struct PhiArc {
  double lo = 0.0;
  double hi = 0.0;
};

struct FamilySample {
  double phi = 0.0;
  std::vector<RigidTransform2> transforms;  // up to two (branches a and b)
};

struct OnePlusOneFamily {
  std::vector<PhiArc> domain;
  bool full_circle = false;  // branches never merge
  std::vector<FamilySample> samples;
  IndClass ind;
};

/// Exactly one measurement from each of two anchors. Error(kWrongDistribution).
OnePlusOneFamily solve_1p1(const Scenario& s, int phi_samples);

SolutionSet solve_2p1(const Scenario& s, const SolverConfig& cfg);
SolutionSet solve_3p1(const Scenario& s, const SolverConfig& cfg);
SolutionSet solve_1p1p1(const Scenario& s, const SolverConfig& cfg);

struct LocusPoint {
  double phi = 0.0;
  Point2 p2 = Point2::Zero();  // world position of the third measurement point
  int arc = 0;
};

struct Locus {
  std::vector<PhiArc> arcs;
  std::vector<LocusPoint> branch_a;
  std::vector<LocusPoint> branch_b;
};

/// Path of the third measurement point while the first two stay on their
/// range circles. Error(kEmptyDomain) when the first two ranges are
/// incompatible.
Locus emit_locus_1p1p1(const Scenario& s, int phi_samples);

/// Closed-form enumeration for any distribution with finite solutions,
/// followed by damped least-squares polishing against every range.
SolutionSet solve_closed_form(const Scenario& s, const SolverConfig& cfg);

DegenerateFlags detect_pathologies(const Scenario& s, const SolutionSet& solutions);

/// Informative count per anchor (C1 -> 1, C2 -> 2, C3 -> 3), descending.
std::vector<int> informative_distribution(const Scenario& s);

struct GlobalAnalysis {
  TaxonomyClass taxonomy;
  SolutionSet solutions;
  DegenerateFlags flags;
  std::string method;  // which closed form produced the solutions
};

GlobalAnalysis analyze_global(const Scenario& s, const SolverConfig& cfg);

TaxonomyClass taxonomy_classify(const Scenario& s);

/// Anchor position expressed in the vehicle frame for each admissible
/// transform, computed from that anchor's own measurements. nullopt for a
/// C1 set (a whole circle of positions).
std::optional<std::vector<Point2>> virtual_anchor_candidates(const Scenario& s,
                                                             const AnchorGroup& group);

}  // namespace constructa
