#include "constructa/critical_lines.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "constructa/error.hpp"
#include "constructa/global_analysis.hpp"

namespace constructa {

namespace {

constexpr double kConicTol = 1e-9;

// Homogeneous bisector {x : 2(w - u).x + |u|^2 - |w|^2 = 0} with unit normal.
Vector3 bisector_coefficients(const Point2& u, const Point2& w) {
  const Point2 n = 2.0 * (w - u);
  Vector3 l(n.x(), n.y(), u.squaredNorm() - w.squaredNorm());
  return l / n.norm();
}

Line2 line_from(const Vector3& l) { return Line2::from_coefficients(l(0), l(1), l(2)); }

void sort_lines(std::vector<CriticalLine>& lines) {
  std::sort(lines.begin(), lines.end(), [](const CriticalLine& a, const CriticalLine& b) {
    return std::tuple(static_cast<int>(a.provenance), a.first, a.second) <
           std::tuple(static_cast<int>(b.provenance), b.first, b.second);
  });
}

}  // namespace

const char* to_string(LineProvenance p) {
  switch (p) {
    case LineProvenance::kRotationAboutAnchor: return "RotationAboutAnchor";
    case LineProvenance::kReflectedPair: return "ReflectedPair";
    case LineProvenance::kVirtualAnchorAxis: return "VirtualAnchorAxis";
    case LineProvenance::kDetWLine: return "DetWLine";
  }
  return "?";
}

std::vector<CriticalLine> critical_lines_2p2(const Scenario& prefix, const SolverConfig& cfg) {
  const Scenario s = prefix.size() > 3 ? constructa::prefix(prefix, 3) : prefix;
  const auto groups = group_by_anchor(s);
  const SolutionSet sols = solve_2p1(s, cfg);
  const AnchorGroup& ga = groups[0].indices.size() == 2 ? groups[0] : groups[1];
  const AnchorGroup& gb = &ga == &groups[0] ? groups[1] : groups[0];
  const Point2 a = s.anchor(ga.id).position;
  const Point2 b = s.anchor(gb.id).position;
  const Point2 q2 = s.point(gb.indices.front());
  const auto cands = *virtual_anchor_candidates(s, ga);
  const double scale = std::max(1.0, (b - a).norm());

  // Branch of each solution: which virtual position of the first anchor it uses.
  std::vector<std::vector<int>> branch(cands.size());
  std::vector<Point2> bv;
  for (std::size_t i = 0; i < sols.solutions.size(); ++i) {
    const auto inv = inverse(sols.solutions[i].transform);
    const Point2 av = apply_transform(inv, a);
    bv.push_back(apply_transform(inv, b));
    std::size_t best = 0;
    for (std::size_t c = 1; c < cands.size(); ++c) {
      if ((cands[c] - av).norm() < (cands[best] - av).norm()) best = c;
    }
    branch[best].push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < bv.size(); ++i) {
    for (std::size_t j = i + 1; j < bv.size(); ++j) {
      if ((bv[i] - bv[j]).norm() <= 1e-9 * scale) {
        throw Error(ErrorCode::kPathologicalConfiguration,
                    "two prefix solutions share the second anchor's virtual position");
      }
    }
  }

  std::vector<CriticalLine> lines;
  for (std::size_t c = 0; c < branch.size(); ++c) {
    if (branch[c].size() < 2) continue;
    const int i = branch[c][0];
    const int j = branch[c][1];
    lines.push_back({Line2::through(cands[c], q2), LineProvenance::kRotationAboutAnchor, i, j});
  }
  if (branch.size() == 2) {
    const auto& br_a = branch[0];
    for (int j : branch[1]) {
      if (br_a.size() != 2) {
        for (int i : br_a) {
          lines.push_back({line_from(bisector_coefficients(bv[static_cast<std::size_t>(j)],
                                                           bv[static_cast<std::size_t>(i)])),
                           LineProvenance::kReflectedPair, std::min(i, j), std::max(i, j)});
        }
        continue;
      }
      const auto& uj = bv[static_cast<std::size_t>(j)];
      const Vector3 l1 = bisector_coefficients(uj, bv[static_cast<std::size_t>(br_a[0])]);
      const Vector3 l2 = bisector_coefficients(uj, bv[static_cast<std::size_t>(br_a[1])]);
      const SymMat3 q = SymMat3::symmetric_product(l1, l2);
      std::array<Line2, 2> pair{line_from(l1), line_from(l2)};
      switch (classify_conic(q, kConicTol)) {
        case ConicClass::kWholePlane:
          throw Error(ErrorCode::kPathologicalConfiguration, "reflected-pair conic vanishes");
        case ConicClass::kDegenerateLinePair: {
          const auto extracted = conic_line_pair(q, kConicTol);
          // Match the extracted lines to the factors by normal direction.
          const Point2 n1(l1(0), l1(1));
          const bool swap = std::abs(extracted[0].normal().dot(n1)) <
                            std::abs(extracted[1].normal().dot(n1));
          pair = swap ? std::array<Line2, 2>{extracted[1], extracted[0]} : extracted;
          break;
        }
        default:
          break;
      }
      for (int k = 0; k < 2; ++k) {
        const int i = br_a[static_cast<std::size_t>(k)];
        lines.push_back({pair[static_cast<std::size_t>(k)], LineProvenance::kReflectedPair,
                         std::min(i, j), std::max(i, j)});
      }
    }
  }
  sort_lines(lines);
  return lines;
}

std::vector<CriticalLine> critical_lines_next_point(const SolutionSet& prefix_solutions,
                                                    const Point2& next_anchor, double tol) {
  const auto& sols = prefix_solutions.solutions;
  if (sols.size() < 2) {
    throw Error(ErrorCode::kNoAmbiguity, "fewer than two prefix solutions");
  }
  std::vector<Point2> v;
  for (const auto& s : sols) v.push_back(apply_transform(inverse(s.transform), next_anchor));
  std::vector<CriticalLine> lines;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if ((v[i] - v[j]).norm() <= tol * std::max(1.0, v[i].norm())) {
        throw Error(ErrorCode::kPathologicalConfiguration,
                    "two prefix solutions place the next anchor at the same virtual position");
      }
      lines.push_back({perpendicular_bisector(v[i], v[j]), LineProvenance::kVirtualAnchorAxis,
                       static_cast<int>(i), static_cast<int>(j)});
    }
  }
  sort_lines(lines);
  return lines;
}

}  // namespace constructa
