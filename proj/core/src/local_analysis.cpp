#include "constructa/local_analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "constructa/error.hpp"

namespace constructa {

namespace {

constexpr double kNullMatchTol = 1e-6;
constexpr double kConsistencyTol = 1e-9;

Vector3 rotation_generator(const Point2& center, const Point2& p_f) {
  return {-(p_f.y() - center.y()), p_f.x() - center.x(), 1.0};
}

}  // namespace

const char* to_string(WeakVerdict v) {
  return v == WeakVerdict::kWeaklyConstructible ? "WeaklyConstructible" : "WeaklyUnconstructible";
}

const char* to_string(DirectionKind k) {
  switch (k) {
    case DirectionKind::kRotationAboutAnchor: return "RotationAboutAnchor";
    case DirectionKind::kRotationAboutPoint: return "RotationAboutPoint";
    case DirectionKind::kUnclassified: return "Unclassified";
  }
  return "?";
}

GramianContribution gramian_contribution(const Point2& p_k, const Point2& anchor,
                                         const Point2& p_f) {
  const Point2 d = p_k - anchor;
  const double rho = d.norm();
  if (rho <= 0.0) throw Error(ErrorCode::kZeroRange, "measurement point coincides with its anchor");
  GramianContribution c;
  c.alpha = polar_angle(d);
  c.p = ((p_f.x() - p_k.x()) * (anchor.y() - p_k.y()) -
         (p_f.y() - p_k.y()) * (anchor.x() - p_k.x())) / rho;
  c.gamma = Vector3(d.x() / rho, d.y() / rho, c.p);
  c.matrix = SymMat3::outer(c.gamma);
  return c;
}

GramianReport analyze_gramian(const SymMat3& g, double rank_tol) {
  GramianReport r;
  r.gramian = g;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g.matrix());
  r.eigenvalues = es.eigenvalues().cwiseMax(0.0);
  r.min_eig = es.eigenvalues()(0);
  const double cutoff = rank_tol * r.eigenvalues(2);
  for (int i = 0; i < 3; ++i) {
    if (r.eigenvalues(i) > cutoff && r.eigenvalues(i) > 0.0) {
      ++r.rank;
    } else {
      r.null_basis.push_back(es.eigenvectors().col(i).normalized());
    }
  }
  r.verdict = r.rank == 3 ? WeakVerdict::kWeaklyConstructible : WeakVerdict::kWeaklyUnconstructible;
  return r;
}

GramianReport build_gramian(const Scenario& s, const RigidTransform2& t,
                            std::optional<Point2> final_point) {
  SymMat3 g;
  if (s.size() == 0) return analyze_gramian(g);
  const Point2 p_f = final_point.value_or(apply_transform(t, s.point(s.size() - 1)));
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Anchor& a = s.anchor_at(k);
    try {
      g += a.weight * gramian_contribution(apply_transform(t, s.point(k)), a.position, p_f).matrix;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroRange) throw;
      throw Error(ErrorCode::kZeroRange,
                  "measurement " + std::to_string(k) + " coincides with anchor " +
                      std::to_string(a.id));
    }
  }
  return analyze_gramian(g);
}

SymMat3 numerical_gramian(const UnicycleControls& controls, const Scenario& s,
                          const RigidTransform2& t) {
  SymMat3 g;
  if (s.size() == 0) return g;
  if (!s.sample_times || s.sample_times->size() != s.size()) {
    throw Error(ErrorCode::kInconsistentControls, "scenario has no sample time per measurement");
  }
  const UnicycleState start{t.dx, t.dy, t.phi};
  const auto& times = *s.sample_times;
  const auto states = integrate(controls, times, start);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Point2 expected = apply_transform(t, s.point(k));
    if ((states[k].position() - expected).norm() > kConsistencyTol * std::max(1.0, expected.norm())) {
      throw Error(ErrorCode::kInconsistentControls,
                  "controls do not reproduce measurement point " + std::to_string(k));
    }
  }
  const double t_f = times.back();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Anchor& a = s.anchor_at(k);
    const Point2 d = states[k].position() - a.position;
    const double rho = d.norm();
    if (rho <= 0.0) {
      throw Error(ErrorCode::kZeroRange, "measurement " + std::to_string(k) + " coincides with its anchor");
    }
    const Eigen::RowVector3d h(d.x() / rho, d.y() / rho, 0.0);
    const Eigen::RowVector3d hp = h * sensitivity(controls, times[k], t_f, start);
    g += a.weight * SymMat3(hp.transpose() * hp);
  }
  return g;
}

std::vector<SingularDirection> singular_direction_report(const GramianReport& report,
                                                         const Scenario& s,
                                                         const RigidTransform2& t) {
  std::vector<SingularDirection> out;
  if (report.null_basis.empty()) return out;
  Eigen::MatrixXd null(3, static_cast<Eigen::Index>(report.null_basis.size()));
  for (std::size_t i = 0; i < report.null_basis.size(); ++i) {
    null.col(static_cast<Eigen::Index>(i)) = report.null_basis[i];
  }
  const Point2 p_f = apply_transform(t, s.point(s.size() - 1));

  std::vector<SingularDirection> candidates;
  for (const auto& a : s.anchors) {
    candidates.push_back({rotation_generator(a.position, p_f).normalized(),
                          DirectionKind::kRotationAboutAnchor, a.id,
                          "rotation about anchor " + std::to_string(a.id)});
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    candidates.push_back({rotation_generator(apply_transform(t, s.point(k)), p_f).normalized(),
                          DirectionKind::kRotationAboutPoint, static_cast<int>(k),
                          "rotation about measurement point " + std::to_string(k)});
  }

  // Greedy: accept generators inside the null space that add a new direction.
  std::vector<Vector3> picked;
  auto residual_after = [&](const Vector3& v) {
    Vector3 r = v;
    for (const auto& q : picked) r -= q.dot(r) * q;
    return r;
  };
  for (const auto& c : candidates) {
    if (picked.size() == report.null_basis.size()) break;
    const Vector3 in_null = null * (null.transpose() * c.direction);
    if ((c.direction - in_null).norm() > kNullMatchTol) continue;
    const Vector3 r = residual_after(c.direction);
    if (r.norm() <= kNullMatchTol) continue;
    picked.push_back(r.normalized());
    out.push_back(c);
  }
  for (const auto& n : report.null_basis) {
    if (picked.size() == report.null_basis.size()) break;
    const Vector3 r = residual_after(n);
    if (r.norm() <= kNullMatchTol) continue;
    picked.push_back(r.normalized());
    out.push_back({r.normalized(), DirectionKind::kUnclassified, -1, "unclassified"});
  }
  return out;
}

Line2 critical_line_1p1p1_local(const Point2& b1, const Point2& b2, const Point2& b3,
                                const Point2& p0, const Point2& p1) {
  const Point2 u0 = p0 - b1;
  const Point2 u1 = p1 - b2;
  if (u0.norm() <= 0.0 || u1.norm() <= 0.0) {
    throw Error(ErrorCode::kZeroRange, "prefix measurement point coincides with its anchor");
  }
  const double den = cross(u0, u1);
  if (std::abs(den) <= 1e-12 * u0.norm() * u1.norm()) {
    throw Error(ErrorCode::kDegeneratePrefix, "the first two measurement rays are parallel");
  }
  // With the final point at the rays' crossing the first two moments vanish,
  // so the determinant reduces to the third moment about that crossing.
  const Point2 cross_pt = b1 + cross(b2 - b1, u1) / den * u0;
  if ((cross_pt - b3).norm() <= 1e-12 * std::max(1.0, b3.norm())) {
    throw Error(ErrorCode::kDegeneratePrefix, "the measurement rays cross at the third anchor");
  }
  return Line2::through(b3, cross_pt);
}

}  // namespace constructa
