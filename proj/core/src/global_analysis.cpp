#include "constructa/global_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "constructa/error.hpp"

namespace constructa {

namespace {

constexpr int kSweepSamples = 20000;
constexpr int kBisectIterations = 100;
constexpr int kGoldenIterations = 120;
constexpr std::size_t kMaxIsolated = 8;
constexpr int kFamilySamples = 32;

double consistency_tol(double scale) { return 1e-6 * std::max(1.0, scale); }

Scenario select(const Scenario& s, const std::vector<std::size_t>& indices) {
  Scenario out = s;
  out.trajectory.points.clear();
  out.schedule.clear();
  std::vector<double> rho;
  std::vector<double> headings;
  for (std::size_t k : indices) {
    out.trajectory.points.push_back(s.point(k));
    out.schedule.push_back(s.schedule[k]);
    if (s.rho) rho.push_back((*s.rho)[k]);
    if (s.trajectory.headings) headings.push_back((*s.trajectory.headings)[k]);
  }
  out.rho = s.rho ? std::optional(rho) : std::nullopt;
  out.trajectory.headings = s.trajectory.headings ? std::optional(headings) : std::nullopt;
  out.controls.reset();
  out.sample_times.reset();
  return out;
}

std::vector<std::size_t> first_of_each(const std::vector<AnchorGroup>& groups, std::size_t n) {
  std::vector<std::size_t> idx;
  for (std::size_t g = 0; g < std::min(n, groups.size()); ++g) idx.push_back(groups[g].indices.front());
  std::sort(idx.begin(), idx.end());
  return idx;
}

AnchorSetClass group_class(const Scenario& s, const AnchorGroup& g) {
  const double tol = s.tolerances.collinear;
  if (s.rho) {
    for (std::size_t k : g.indices) {
      if ((*s.rho)[k] <= tol) return AnchorSetClass::kC3;
    }
  }
  const auto pts = points_of(s, g);
  bool coincident = true;
  for (const auto& p : pts) coincident = coincident && (p - pts.front()).norm() <= tol;
  if (coincident) return AnchorSetClass::kC1;
  return collinear(pts, tol) ? AnchorSetClass::kC2 : AnchorSetClass::kC3;
}

int informative(AnchorSetClass c) {
  switch (c) {
    case AnchorSetClass::kC1: return 1;
    case AnchorSetClass::kC2: return 2;
    case AnchorSetClass::kC3: return 3;
  }
  return 0;
}

SolutionSet polish(const Scenario& s, const std::vector<RigidTransform2>& starts,
                   const SolverConfig& cfg) {
  SolutionSet out;
  for (const auto& t : starts) {
    const Solution sol = refine(s, t, cfg);
    if (sol.residual_norm <= cfg.accept_tol) out.solutions.push_back(sol);
  }
  dedup_and_sort(out.solutions, cfg.dedup_m, cfg.dedup_rad);
  if (out.solutions.size() > kMaxIsolated) {
    out.warnings.push_back("more isolated solutions than the degree bound; check tolerances");
  }
  out.ind = count_indistinguishable(out);
  return out;
}

// Rigid transforms placing anchor A's virtual position va on A and the
// vehicle point q (range rho to anchor B) on circle(B, rho).
std::vector<RigidTransform2> place_with_virtual_anchor(const Point2& va, const Point2& q,
                                                       double rho, const Point2& a,
                                                       const Point2& b, double tangency) {
  std::vector<RigidTransform2> out;
  const double d = (q - va).norm();
  if (d <= tangency) return out;
  const auto hit = circle_circle_intersect({a, d}, {b, rho}, tangency);
  for (int i = 0; i < hit.count(); ++i) {
    out.push_back(transform_from_correspondences(va, q, a, hit.points[static_cast<std::size_t>(i)]));
  }
  return out;
}

// One measurement from each of two anchors: P0 sweeps circle(B1, r0) by its
// polar angle phi; P1 is where circle(P0, s) meets circle(B2, r1).
struct Sweep {
  Point2 b1, b2, q0, q1;
  double r0 = 0.0, r1 = 0.0, s = 0.0, dist = 0.0, phi_b2 = 0.0;
  std::vector<PhiArc> arcs;
  bool full = false;
  bool point_domain = false;

  // Transforms for branches a (P1 left of P0 -> B2) and b.
  std::array<std::optional<RigidTransform2>, 2> at(double phi) const {
    std::array<std::optional<RigidTransform2>, 2> out;
    const Point2 p0 = b1 + r0 * unit_vector(phi);
    const Point2 e = b2 - p0;
    const double d = e.norm();
    if (d < 1e-12) return out;
    const Point2 u = e / d;
    const double x = (d * d + s * s - r1 * r1) / (2.0 * d);
    const double h2 = s * s - x * x;
    if (h2 < -1e-6 * std::max(1.0, s * s)) return out;
    const double h = std::sqrt(std::max(0.0, h2));
    const Point2 foot = p0 + x * u;
    out[0] = transform_from_correspondences(q0, q1, p0, foot + h * perp(u));
    out[1] = transform_from_correspondences(q0, q1, p0, foot - h * perp(u));
    return out;
  }
};

Sweep make_sweep(const Scenario& s, std::size_t k0, std::size_t k1) {
  const auto& rho = s.ranges();
  Sweep w;
  w.b1 = s.anchor_at(k0).position;
  w.b2 = s.anchor_at(k1).position;
  w.q0 = s.point(k0);
  w.q1 = s.point(k1);
  w.r0 = rho[k0];
  w.r1 = rho[k1];
  w.s = (w.q1 - w.q0).norm();
  w.dist = (w.b2 - w.b1).norm();
  w.phi_b2 = polar_angle(w.b2 - w.b1);
  const double tol = s.tolerances.collinear;
  if (w.r0 <= tol || w.r1 <= tol) {
    throw Error(ErrorCode::kDegenerateInput, "a measurement point coincides with its anchor");
  }
  if (w.s <= tol) throw Error(ErrorCode::kDegenerateInput, "the two measurement points coincide");

  const double deg = s.tolerances.degenerate;
  if (std::abs((w.s + w.r1) - std::abs(w.dist - w.r0)) <= deg) {
    w.point_domain = true;
    w.arcs = {{w.phi_b2, w.phi_b2}};
    return w;
  }
  if (std::abs(std::abs(w.s - w.r1) - (w.dist + w.r0)) <= deg) {
    w.point_domain = true;
    w.arcs = {{w.phi_b2 + kPi, w.phi_b2 + kPi}};
    return w;
  }
  const double denom = 2.0 * w.dist * w.r0;
  const double base = w.dist * w.dist + w.r0 * w.r0;
  const double cmin = (base - (w.s + w.r1) * (w.s + w.r1)) / denom;
  const double cmax = (base - (w.s - w.r1) * (w.s - w.r1)) / denom;
  if (cmin > 1.0 || cmax < -1.0) return w;  // empty domain
  const double a = std::acos(std::clamp(cmax, -1.0, 1.0));
  const double b = std::acos(std::clamp(cmin, -1.0, 1.0));
  const bool open_at_zero = cmax >= 1.0;
  const bool open_at_pi = cmin <= -1.0;
  if (open_at_zero && open_at_pi) {
    w.full = true;
    w.arcs = {{w.phi_b2 - kPi, w.phi_b2 + kPi}};
  } else if (open_at_zero) {
    w.arcs = {{w.phi_b2 - b, w.phi_b2 + b}};
  } else if (open_at_pi) {
    w.arcs = {{w.phi_b2 + a, w.phi_b2 + kTwoPi - a}};
  } else {
    w.arcs = {{w.phi_b2 + a, w.phi_b2 + b}, {w.phi_b2 - b, w.phi_b2 - a}};
  }
  return w;
}

std::vector<double> arc_samples(const std::vector<PhiArc>& arcs, int n, std::vector<int>* arc_of) {
  std::vector<double> out;
  double total = 0.0;
  for (const auto& a : arcs) total += a.hi - a.lo;
  int remaining = n;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const auto& a = arcs[i];
    int m = i + 1 == arcs.size()
                ? remaining
                : static_cast<int>(std::lround(n * (total > 0.0 ? (a.hi - a.lo) / total : 1.0 / arcs.size())));
    m = std::clamp(m, 0, remaining);
    remaining -= m;
    for (int j = 0; j < m; ++j) {
      const double f = m == 1 ? 0.5 : static_cast<double>(j) / (m - 1);
      out.push_back(a.lo + f * (a.hi - a.lo));
      if (arc_of) arc_of->push_back(static_cast<int>(i));
    }
  }
  return out;
}

// A closed curve traversed by tau in [0, period]. Merged loops run branch a
// forward and branch b backward over one arc; periodic loops follow a single
// branch around the full circle.
struct Loop {
  PhiArc arc;
  int branch = -1;  // -1 merged, otherwise the branch followed
  double period() const { return branch < 0 ? 2.0 : 1.0; }
  std::pair<double, int> map(double tau) const {
    if (branch >= 0) return {arc.lo + tau * (arc.hi - arc.lo), branch};
    if (tau <= 1.0) return {arc.lo + tau * (arc.hi - arc.lo), 0};
    return {arc.hi - (tau - 1.0) * (arc.hi - arc.lo), 1};
  }
};

std::vector<RigidTransform2> sweep_roots(const Sweep& w,
                                         const std::function<double(const RigidTransform2&)>& f) {
  std::vector<RigidTransform2> roots;
  if (w.point_domain) {
    for (const auto& t : w.at(w.arcs.front().lo)) {
      if (t) roots.push_back(*t);
    }
    return roots;
  }
  std::vector<Loop> loops;
  for (const auto& arc : w.arcs) {
    if (w.full) {
      loops.push_back({arc, 0});
      loops.push_back({arc, 1});
    } else {
      loops.push_back({arc, -1});
    }
  }
  const int per_loop = std::max(64, kSweepSamples / static_cast<int>(std::max<std::size_t>(1, loops.size())));
  for (const auto& loop : loops) {
    auto eval = [&](double tau, RigidTransform2* out) -> std::optional<double> {
      const auto [phi, branch] = loop.map(tau);
      const auto ts = w.at(phi);
      if (!ts[static_cast<std::size_t>(branch)]) return std::nullopt;
      if (out) *out = *ts[static_cast<std::size_t>(branch)];
      return f(*ts[static_cast<std::size_t>(branch)]);
    };
    std::vector<double> taus(static_cast<std::size_t>(per_loop) + 1);
    std::vector<std::optional<double>> vals(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
      taus[i] = loop.period() * static_cast<double>(i) / per_loop;
      vals[i] = eval(taus[i], nullptr);
    }
    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
      if (!vals[i] || !vals[i + 1]) continue;
      const double fa = *vals[i];
      const double fb = *vals[i + 1];
      if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
        double lo = taus[i];
        double hi = taus[i + 1];
        double flo = fa;
        for (int it = 0; it < kBisectIterations && fa != 0.0; ++it) {
          const double mid = 0.5 * (lo + hi);
          const auto fm = eval(mid, nullptr);
          if (!fm) break;
          if ((*fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = *fm;
          } else {
            hi = mid;
          }
        }
        RigidTransform2 t;
        if (eval(fa == 0.0 ? taus[i] : 0.5 * (lo + hi), &t)) roots.push_back(t);
      }
    }
    // Touching roots (no sign change): golden-section search on |f| around
    // every sampled local minimum.
    for (std::size_t i = 1; i + 1 < taus.size(); ++i) {
      if (!vals[i - 1] || !vals[i] || !vals[i + 1]) continue;
      const double m = std::abs(*vals[i]);
      if (!(m <= std::abs(*vals[i - 1]) && m <= std::abs(*vals[i + 1]))) continue;
      if ((*vals[i - 1] < 0.0) != (*vals[i] < 0.0) || (*vals[i + 1] < 0.0) != (*vals[i] < 0.0)) continue;
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = taus[i - 1];
      double b = taus[i + 1];
      auto absf = [&](double tau) {
        const auto v = eval(tau, nullptr);
        return v ? std::abs(*v) : 1e300;
      };
      double c = b - gr * (b - a);
      double d = a + gr * (b - a);
      double fc = absf(c);
      double fd = absf(d);
      for (int it = 0; it < kGoldenIterations; ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = absf(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = absf(d);
        }
      }
      const double best = 0.5 * (a + b);
      RigidTransform2 t;
      const auto v = eval(best, &t);
      if (v && std::abs(*v) <= 1e-6 * std::max(1.0, w.dist)) roots.push_back(t);
    }
  }
  return roots;
}

// Anchors with at least one non-C1 set or repeated points reduce to three
// single-measurement anchors for the sweep.
SolutionSet sweep_1p1p1(const Scenario& s, const std::vector<AnchorGroup>& groups,
                        const SolverConfig& cfg) {
  const auto idx = first_of_each(groups, 3);
  const Scenario r = select(s, idx);
  const Sweep w = make_sweep(r, 0, 1);
  const Point2 b3 = r.anchor_at(2).position;
  const Point2 q2 = r.point(2);
  const double r2 = r.ranges()[2];
  const auto roots =
      sweep_roots(w, [&](const RigidTransform2& t) { return (apply_transform(t, q2) - b3).norm() - r2; });
  return polish(s, roots, cfg);
}

std::vector<RigidTransform2> virtual_pair_transforms(const std::vector<Point2>& va,
                                                     const std::vector<Point2>& vb,
                                                     const Point2& a, const Point2& b) {
  std::vector<RigidTransform2> out;
  const double dist = (b - a).norm();
  for (const auto& pa : va) {
    for (const auto& pb : vb) {
      if (std::abs((pb - pa).norm() - dist) <= consistency_tol(dist)) {
        out.push_back(transform_from_correspondences(pa, pb, a, b));
      }
    }
  }
  return out;
}

SolutionSet solve_virtual_plus_one(const Scenario& s, const SolverConfig& cfg, int multi,
                                   bool require_two_candidates) {
  const auto groups = group_by_anchor(s);
  const auto dist = informative_distribution(s);
  if (groups.size() != 2 || dist != std::vector<int>{multi, 1}) {
    throw Error(ErrorCode::kWrongDistribution,
                "expected distribution " + std::to_string(multi) + "+1");
  }
  const AnchorGroup& ga = informative(group_class(s, groups[0])) == multi ? groups[0] : groups[1];
  const AnchorGroup& gb = &ga == &groups[0] ? groups[1] : groups[0];
  const auto cands = virtual_anchor_candidates(s, ga);
  if (!cands || (require_two_candidates && cands->size() < 2)) {
    throw Error(ErrorCode::kDegenerateInput,
                "the measurement points of the repeated anchor are collinear with it");
  }
  const std::size_t kb = gb.indices.front();
  std::vector<RigidTransform2> starts;
  for (const auto& va : *cands) {
    const auto ts = place_with_virtual_anchor(va, s.point(kb), s.ranges()[kb],
                                              s.anchor(ga.id).position, s.anchor(gb.id).position,
                                              s.tolerances.tangency);
    starts.insert(starts.end(), ts.begin(), ts.end());
  }
  return polish(s, starts, cfg);
}

bool preserves_ranges(const Scenario& s, const RigidTransform2& t) {
  double scale = 1.0;
  for (double r : s.ranges()) scale = std::max(scale, r);
  return residuals(s, t).cwiseAbs().maxCoeff() <= consistency_tol(scale);
}

bool constructible_distribution(const std::vector<int>& dist) {
  const int total = std::accumulate(dist.begin(), dist.end(), 0);
  if (dist.size() <= 1 || total <= 3) return false;
  if (dist.size() == 2 && dist.back() == 1) return false;
  return true;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kUnconstructible: return "Unconstructible";
    case Verdict::kConstructibleGeneric: return "ConstructibleGeneric";
    case Verdict::kDegenerateConstructible: return "DegenerateConstructible";
    case Verdict::kPathologicalUnconstructible: return "PathologicalUnconstructible";
  }
  return "?";
}

std::string TaxonomyClass::distribution_str() const {
  std::string out;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    if (i) out += "+";
    out += std::to_string(distribution[i]);
  }
  return out;
}

std::vector<double> delta_angle(double rho0, double rho1, double s01, double tol) {
  if (!(rho0 > 0.0) || !(rho1 > 0.0) || !(s01 > 0.0)) {
    throw Error(ErrorCode::kNonPositiveInput, "ranges and segment length must be positive");
  }
  const double c = (rho0 * rho0 + rho1 * rho1 - s01 * s01) / (2.0 * rho0 * rho1);
  if (std::abs(c) > 1.0 + tol) return {};
  if (c >= 1.0 - tol) return {0.0};
  if (c <= -1.0 + tol) return {kPi};
  const double d = std::acos(c);
  return {d, -d};
}

IndClass single_anchor_family(std::span<const Point2> points, const Point2& anchor, double tol) {
  switch (classify_anchor_set(points, anchor, tol)) {
    case AnchorSetClass::kC1: return IndClass::family(2, 1);
    case AnchorSetClass::kC3: return IndClass::family(1, 1);
    case AnchorSetClass::kC2: {
      std::vector<Point2> with_anchor(points.begin(), points.end());
      with_anchor.push_back(anchor);
      return IndClass::family(1, collinear(with_anchor, tol) ? 1 : 2);
    }
  }
  return IndClass::family(1, 1);
}

IndClass single_anchor_family(const Scenario& s) {
  const auto groups = group_by_anchor(s);
  if (groups.size() != 1) throw Error(ErrorCode::kMixedAnchors, "schedule uses more than one anchor");
  switch (group_class(s, groups[0])) {
    case AnchorSetClass::kC1: return IndClass::family(2, 1);
    case AnchorSetClass::kC3: return IndClass::family(1, 1);
    case AnchorSetClass::kC2: {
      const auto cands = virtual_anchor_candidates(s, groups[0]);
      return IndClass::family(1, cands && cands->size() == 1 ? 1 : 2);
    }
  }
  return IndClass::family(1, 1);
}

std::optional<std::vector<Point2>> virtual_anchor_candidates(const Scenario& s,
                                                             const AnchorGroup& group) {
  const auto& rho = s.ranges();
  const auto pts = points_of(s, group);
  std::vector<double> r;
  for (std::size_t k : group.indices) r.push_back(rho[k]);
  double scale = 1.0;
  for (double v : r) scale = std::max(scale, v);
  auto consistent = [&](const Point2& v) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::abs((pts[i] - v).norm() - r[i]) > consistency_tol(scale)) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (r[i] <= s.tolerances.collinear) {
      if (consistent(pts[i])) return std::vector<Point2>{pts[i]};
      return std::vector<Point2>{};
    }
  }
  const AnchorSetClass cls = group_class(s, group);
  if (cls == AnchorSetClass::kC1) return std::nullopt;
  if (cls == AnchorSetClass::kC3) {
    // |v - q_i|^2 = r_i^2 minus the first equation is linear in v.
    const auto m = static_cast<Eigen::Index>(pts.size() - 1);
    Eigen::MatrixXd a(m, 2);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& q = pts[static_cast<std::size_t>(i + 1)];
      a.row(i) = 2.0 * (q - pts[0]).transpose();
      b(i) = q.squaredNorm() - pts[0].squaredNorm() - r[static_cast<std::size_t>(i + 1)] *
             r[static_cast<std::size_t>(i + 1)] + r[0] * r[0];
    }
    const Point2 v = a.colPivHouseholderQr().solve(b);
    return std::vector<Point2>{v};
  }
  // C2: two mirror positions across the measurement line.
  std::size_t bi = 0;
  std::size_t bj = 1;
  double far = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = (pts[i] - pts[j]).norm();
      if (d > far) {
        far = d;
        bi = i;
        bj = j;
      }
    }
  }
  std::vector<Point2> out;
  const auto hit = circle_circle_intersect({pts[bi], r[bi]}, {pts[bj], r[bj]}, s.tolerances.tangency);
  for (int i = 0; i < hit.count(); ++i) {
    const Point2& v = hit.points[static_cast<std::size_t>(i)];
    if (consistent(v)) out.push_back(v);
  }
  return out;
}

std::vector<int> informative_distribution(const Scenario& s) {
  std::vector<int> dist;
  for (const auto& g : group_by_anchor(s)) dist.push_back(informative(group_class(s, g)));
  std::sort(dist.rbegin(), dist.rend());
  return dist;
}

OnePlusOneFamily solve_1p1(const Scenario& s, int phi_samples) {
  const auto groups = group_by_anchor(s);
  if (s.size() != 2 || groups.size() != 2) {
    throw Error(ErrorCode::kWrongDistribution, "expected one measurement from each of two anchors");
  }
  const Sweep w = make_sweep(s, 0, 1);
  OnePlusOneFamily fam;
  fam.domain = w.arcs;
  fam.full_circle = w.full;
  if (w.arcs.empty()) {
    fam.ind = IndClass::finite(0);
    return fam;
  }
  if (w.point_domain) {
    FamilySample smp;
    smp.phi = w.arcs.front().lo;
    const auto ts = w.at(smp.phi);
    if (ts[0]) smp.transforms.push_back(*ts[0]);
    fam.samples.push_back(smp);
    fam.ind = IndClass::finite(1);
    return fam;
  }
  for (double phi : arc_samples(w.arcs, std::max(2, phi_samples), nullptr)) {
    FamilySample smp;
    smp.phi = wrap_angle(phi);
    for (const auto& t : w.at(phi)) {
      if (t) smp.transforms.push_back(*t);
    }
    fam.samples.push_back(smp);
  }
  fam.ind = IndClass::family(1, 2);
  return fam;
}

SolutionSet solve_2p1(const Scenario& s, const SolverConfig& cfg) {
  return solve_virtual_plus_one(s, cfg, 2, true);
}

SolutionSet solve_3p1(const Scenario& s, const SolverConfig& cfg) {
  return solve_virtual_plus_one(s, cfg, 3, false);
}

SolutionSet solve_1p1p1(const Scenario& s, const SolverConfig& cfg) {
  const auto groups = group_by_anchor(s);
  if (groups.size() != 3 || informative_distribution(s) != std::vector<int>{1, 1, 1}) {
    throw Error(ErrorCode::kWrongDistribution, "expected distribution 1+1+1");
  }
  return sweep_1p1p1(s, groups, cfg);
}

Locus emit_locus_1p1p1(const Scenario& s, int phi_samples) {
  if (s.size() < 3) {
    throw Error(ErrorCode::kWrongDistribution, "the locus needs a third measurement point");
  }
  if (s.schedule[0] == s.schedule[1]) {
    throw Error(ErrorCode::kWrongDistribution, "the first two measurements need distinct anchors");
  }
  const Sweep w = make_sweep(s, 0, 1);
  if (w.arcs.empty()) throw Error(ErrorCode::kEmptyDomain, "first two ranges are incompatible");
  Locus locus;
  locus.arcs = w.arcs;
  std::vector<int> arc_of;
  const auto phis = arc_samples(w.arcs, std::max(1, phi_samples), &arc_of);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const auto ts = w.at(phis[i]);
    if (ts[0]) locus.branch_a.push_back({wrap_angle(phis[i]), apply_transform(*ts[0], s.point(2)), arc_of[i]});
    if (ts[1]) locus.branch_b.push_back({wrap_angle(phis[i]), apply_transform(*ts[1], s.point(2)), arc_of[i]});
  }
  return locus;
}

SolutionSet solve_closed_form(const Scenario& s, const SolverConfig& cfg) {
  const auto groups = group_by_anchor(s);
  std::vector<std::pair<const AnchorGroup*, std::vector<Point2>>> finite;
  std::vector<const AnchorGroup*> circles;
  for (const auto& g : groups) {
    auto c = virtual_anchor_candidates(s, g);
    if (c) {
      finite.emplace_back(&g, std::move(*c));
    } else {
      circles.push_back(&g);
    }
  }
  std::vector<RigidTransform2> starts;
  if (finite.size() >= 2) {
    starts = virtual_pair_transforms(finite[0].second, finite[1].second,
                                     s.anchor(finite[0].first->id).position,
                                     s.anchor(finite[1].first->id).position);
  } else if (finite.size() == 1 && !circles.empty()) {
    const auto& ga = *finite[0].first;
    const std::size_t kb = circles.front()->indices.front();
    for (const auto& va : finite[0].second) {
      const auto ts = place_with_virtual_anchor(va, s.point(kb), s.ranges()[kb],
                                                s.anchor(ga.id).position,
                                                s.anchor_at(kb).position, s.tolerances.tangency);
      starts.insert(starts.end(), ts.begin(), ts.end());
    }
  } else if (circles.size() >= 3) {
    return sweep_1p1p1(s, groups, cfg);
  } else {
    SolutionSet out;
    out.warnings.push_back("measurements admit a continuous family; no closed form");
    return out;
  }
  return polish(s, starts, cfg);
}

DegenerateFlags detect_pathologies(const Scenario& s, const SolutionSet& solutions) {
  DegenerateFlags f;
  if (!s.rho) return f;
  const auto groups = group_by_anchor(s);
  const auto dist = informative_distribution(s);
  const double deg = s.tolerances.degenerate;
  const auto& rho = *s.rho;

  if (dist == std::vector<int>{1, 1}) {
    const std::size_t k0 = groups[0].indices.front();
    const std::size_t k1 = groups[1].indices.front();
    const double d = (s.anchor_at(k1).position - s.anchor_at(k0).position).norm();
    const double seg = (s.point(k1) - s.point(k0)).norm();
    f.case1_straight = std::abs(seg + rho[k1] - std::abs(d - rho[k0])) <= deg ||
                       std::abs(std::abs(seg - rho[k1]) - (d + rho[k0])) <= deg;
  }
  if (dist == std::vector<int>{1, 1, 1}) {
    for (const auto& sol : solutions.solutions) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual_jacobian(s, sol.transform));
      const auto& sv = svd.singularValues();
      if (sv(0) > 0.0 && sv(sv.size() - 1) / sv(0) <= std::sqrt(deg)) f.case2_tangent_locus = true;
    }
  }
  if (groups.size() == 2 && (dist == std::vector<int>{2, 1} || dist == std::vector<int>{3, 1})) {
    const bool first_multi = informative(group_class(s, groups[0])) > 1;
    const auto& ga = first_multi ? groups[0] : groups[1];
    const auto& gb = first_multi ? groups[1] : groups[0];
    const auto cands = virtual_anchor_candidates(s, ga);
    const std::size_t kb = gb.indices.front();
    const double d_ab = (s.anchor(gb.id).position - s.anchor(ga.id).position).norm();
    bool tangent = false;
    if (cands) {
      for (const auto& va : *cands) {
        const double d = (s.point(kb) - va).norm();
        tangent = tangent || std::abs(d - (d_ab + rho[kb])) <= deg ||
                  std::abs(d - std::abs(d_ab - rho[kb])) <= deg;
      }
    }
    (dist[0] == 2 ? f.case3_tangent_circles : f.case4_tangent_3p1) = tangent;
  }

  // Symmetries only count as pathologies where the layout would otherwise
  // pin the trajectory down.
  if (!constructible_distribution(dist)) return f;
  for (const auto& pivot : groups) {
    if (group_class(s, pivot) != AnchorSetClass::kC3) continue;
    const Point2 a = s.anchor(pivot.id).position;
    for (const auto& other : groups) {
      if (other.id == pivot.id || group_class(s, other) == AnchorSetClass::kC3) continue;
      const Point2 b = s.anchor(other.id).position;
      for (const auto& sol : solutions.solutions) {
        for (std::size_t k : other.indices) {
          const Point2 p = apply_transform(sol.transform, s.point(k));
          if ((p - a).norm() <= s.tolerances.collinear) continue;
          const double theta = wrap_angle(2.0 * (polar_angle(b - a) - polar_angle(p - a)));
          if (std::abs(theta) <= 1e-9) continue;
          const RigidTransform2 rot(0.0, 0.0, theta);
          const Point2 shift = a - rot.rotation() * a;
          const RigidTransform2 moved =
              compose(RigidTransform2(shift.x(), shift.y(), theta), sol.transform);
          if (preserves_ranges(s, moved)) f.pathological_rotation = true;
        }
      }
    }
  }
  for (const auto& g : groups) {
    if (group_class(s, g) != AnchorSetClass::kC2) continue;
    const auto pts = points_of(s, g);
    const Point2 b = s.anchor(g.id).position;
    for (const auto& sol : solutions.solutions) {
      Point2 lo = apply_transform(sol.transform, pts.front());
      Point2 hi = lo;
      double far = 0.0;
      for (const auto& q : pts) {
        const Point2 w = apply_transform(sol.transform, q);
        if ((w - lo).norm() > far) {
          far = (w - lo).norm();
          hi = w;
        }
      }
      const Point2 n = perp((hi - lo) / far);
      const double offset = n.dot(lo - b);
      if (std::abs(offset) <= s.tolerances.collinear) continue;
      const Point2 tau = -2.0 * offset * n;
      const RigidTransform2 moved(sol.transform.dx + tau.x(), sol.transform.dy + tau.y(),
                                  sol.transform.phi);
      if (preserves_ranges(s, moved)) f.pathological_translation = true;
    }
  }
  return f;
}

GlobalAnalysis analyze_global(const Scenario& s, const SolverConfig& cfg) {
  s.ranges();
  GlobalAnalysis out;
  const auto groups = group_by_anchor(s);
  const auto dist = informative_distribution(s);
  out.taxonomy.distribution = dist;

  std::optional<IndClass> family_class;
  if (groups.size() == 1) {
    out.method = "single-anchor";
    family_class = single_anchor_family(s);
    out.solutions = solve_multistart(s, cfg);
  } else if (dist == std::vector<int>{1, 1}) {
    out.method = "1+1";
    const Scenario r = select(s, first_of_each(groups, 2));
    const auto fam = solve_1p1(r, kFamilySamples);
    std::vector<RigidTransform2> reps;
    for (const auto& smp : fam.samples) reps.insert(reps.end(), smp.transforms.begin(), smp.transforms.end());
    if (fam.ind.is_finite()) {
      out.solutions = polish(s, reps, cfg);
    } else {
      family_class = fam.ind;
      for (const auto& t : reps) {
        const Solution sol = refine(s, t, cfg);
        if (sol.residual_norm <= cfg.accept_tol) out.solutions.solutions.push_back(sol);
      }
      dedup_and_sort(out.solutions.solutions, cfg.dedup_m, cfg.dedup_rad);
    }
  } else if (dist == std::vector<int>{2, 1} && groups.size() == 2) {
    try {
      out.method = "2+1";
      out.solutions = solve_2p1(s, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      out.method = "closed-form";
      out.solutions = solve_closed_form(s, cfg);
    }
  } else if (dist == std::vector<int>{3, 1} && groups.size() == 2) {
    out.method = "3+1";
    out.solutions = solve_3p1(s, cfg);
  } else if (dist == std::vector<int>{1, 1, 1}) {
    out.method = "1+1+1";
    out.solutions = solve_1p1p1(s, cfg);
  } else {
    out.method = "closed-form";
    out.solutions = solve_closed_form(s, cfg);
  }
  if (out.solutions.empty() && !family_class) {
    out.method += "+multistart";
    out.solutions = solve_multistart(s, cfg);
    if (out.solutions.family) family_class = count_indistinguishable(out.solutions);
  }
  if (family_class) {
    out.solutions.family = FamilyInfo{family_class->dimension, family_class->multiplicity,
                                      family_class->str() + " closed-form family"};
    out.solutions.ind = family_class;
  } else {
    out.solutions.family.reset();
    out.solutions.ind = count_indistinguishable(out.solutions);
  }

  out.flags = detect_pathologies(s, out.solutions);
  out.taxonomy.ind = out.solutions.ind.value_or(IndClass::finite(0));
  const bool unique = out.solutions.ind && out.solutions.ind->unique();
  if (constructible_distribution(dist)) {
    out.taxonomy.verdict = unique ? Verdict::kConstructibleGeneric : Verdict::kPathologicalUnconstructible;
  } else {
    out.taxonomy.verdict = unique ? Verdict::kDegenerateConstructible : Verdict::kUnconstructible;
  }
  return out;
}

TaxonomyClass taxonomy_classify(const Scenario& s) {
  return analyze_global(s, SolverConfig::for_scenario(s)).taxonomy;
}

}  // namespace constructa
