#pragma once

#include <vector>

#include "constructa/geom.hpp"
#include "constructa/scenario.hpp"
#include "constructa/solver.hpp"

namespace constructa {

enum class LineProvenance { kRotationAboutAnchor, kReflectedPair, kVirtualAnchorAxis, kDetWLine };

const char* to_string(LineProvenance p);

/// A vehicle-frame line the next measurement point must avoid. `first` and
/// `second` index the prefix solutions the line fails to separate.
struct CriticalLine {
  Line2 line;
  LineProvenance provenance = LineProvenance::kVirtualAnchorAxis;
  int first = -1;
  int second = -1;
};

/// The six lines of a 2+1 prefix (two measurements from the first anchor, one
/// from the second) on which a fourth point measured from the second anchor
/// leaves the trajectory ambiguous. Solutions are indexed as in solve_2p1.
/// Error(kPathologicalConfiguration) when two prefix solutions share the
/// second anchor's virtual position.
std::vector<CriticalLine> critical_lines_2p2(const Scenario& prefix, const SolverConfig& cfg);

/// Perpendicular bisectors of the virtual positions of `next_anchor` under
/// each pair of prefix solutions. Error(kNoAmbiguity) for fewer than two
/// solutions; Error(kPathologicalConfiguration) when a pair coincides.
std::vector<CriticalLine> critical_lines_next_point(const SolutionSet& prefix_solutions,
                                                    const Point2& next_anchor, double tol = 1e-9);

}  // namespace constructa
