#include "constructa/geom.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "constructa/error.hpp"

namespace constructa {

double wrap_angle(double angle) {
  if (!std::isfinite(angle)) return angle;
  if (angle >= -kPi && angle < kPi) return angle;
  double a = std::fmod(angle + kPi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  a -= kPi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (a >= kPi) a -= kTwoPi;
  return a;
}

Eigen::Matrix2d RigidTransform2::rotation() const {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Point2 apply_transform(const RigidTransform2& t, const Point2& p) {
  const double c = std::cos(t.phi);
  const double s = std::sin(t.phi);
  return {c * p.x() - s * p.y() + t.dx, s * p.x() + c * p.y() + t.dy};
}

RigidTransform2 compose(const RigidTransform2& a, const RigidTransform2& b) {
  const Point2 t = apply_transform(a, b.translation());
  return {t.x(), t.y(), a.phi + b.phi};
}

RigidTransform2 inverse(const RigidTransform2& t) {
  const double c = std::cos(t.phi);
  const double s = std::sin(t.phi);
  // R^T (-t)
  return {-(c * t.dx + s * t.dy), -(-s * t.dx + c * t.dy), -t.phi};
}

RigidTransform2 transform_from_correspondences(const Point2& a_v, const Point2& b_v,
                                               const Point2& a_w, const Point2& b_w) {
  const double phi = polar_angle(b_w - a_w) - polar_angle(b_v - a_v);
  RigidTransform2 t(0.0, 0.0, phi);
  const Point2 shift = a_w - t.rotation() * a_v;
  t.dx = shift.x();
  t.dy = shift.y();
  return t;
}

bool same_transform(const RigidTransform2& a, const RigidTransform2& b, double tol_m,
                    double tol_rad) {
  return std::abs(a.dx - b.dx) <= tol_m && std::abs(a.dy - b.dy) <= tol_m &&
         std::abs(angle_diff(a.phi, b.phi)) <= tol_rad;
}

Line2 Line2::through(const Point2& a, const Point2& b) { return from_point_direction(a, b - a); }

Line2 Line2::from_point_direction(const Point2& p, const Point2& d) {
  Line2 l;
  l.point = p;
  const double n = d.norm();
  l.direction = n > 0.0 ? Point2(d / n) : Point2(Point2::UnitX());
  return l;
}

Line2 Line2::from_coefficients(double a, double b, double c) {
  const Point2 n(a, b);
  const double nn = n.squaredNorm();
  Line2 l;
  l.point = -c / nn * n;
  l.direction = Point2(b, -a) / std::sqrt(nn);
  return l;
}

CircleIntersection circle_circle_intersect(const Circle& a, const Circle& b, double tol) {
  CircleIntersection out;
  const Point2 ab = b.center - a.center;
  const double d = ab.norm();
  if (d <= tol) {
    if (std::abs(a.radius - b.radius) <= tol) out.kind = CircleIntersection::Kind::kCoincident;
    return out;
  }
  const double outer = a.radius + b.radius;
  const double inner = std::abs(a.radius - b.radius);
  const Point2 u = ab / d;
  if (std::abs(d - outer) <= tol || std::abs(d - inner) <= tol) {
    out.kind = CircleIntersection::Kind::kTangent;
    const double x = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
    out.points[0] = a.center + x * u;
    return out;
  }
  if (d > outer || d < inner) return out;
  const double x = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, a.radius * a.radius - x * x));
  const Point2 foot = a.center + x * u;
  out.kind = CircleIntersection::Kind::kPair;
  out.points[0] = foot + h * perp(u);
  out.points[1] = foot - h * perp(u);
  return out;
}

bool collinear(std::span<const Point2> points, double tol) {
  if (points.size() <= 2) return true;
  Point2 mean = Point2::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Point2 dir = es.eigenvectors().col(1);
  const Point2 normal = perp(dir);
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, std::abs(normal.dot(p - mean)));
  return worst <= tol;
}

double point_line_distance(const Point2& p, const Line2& l) {
  return std::abs(signed_distance(p, l));
}

double signed_distance(const Point2& p, const Line2& l) { return l.normal().dot(p - l.point); }

Line2 perpendicular_bisector(const Point2& a, const Point2& b) {
  return Line2::from_point_direction(0.5 * (a + b), perp(b - a));
}

SymMat3 SymMat3::symmetric_product(const Vector3& u, const Vector3& v) {
  return SymMat3(0.5 * (u * v.transpose() + v * u.transpose()));
}

namespace {

Eigen::Matrix3d normalized(const SymMat3& q) {
  const double m = q.max_abs();
  return m > 0.0 ? Eigen::Matrix3d(q.matrix() / m) : q.matrix();
}

}  // namespace

ConicClass classify_conic(const SymMat3& q, double tol) {
  if (q.max_abs() <= tol) return ConicClass::kWholePlane;
  const Eigen::Matrix3d n = normalized(q);
  const double det_q = n.determinant();
  const double det_s = n.topLeftCorner<2, 2>().determinant();
  if (std::abs(det_q) <= tol) {
    if (det_s < -tol) return ConicClass::kDegenerateLinePair;
    if (det_s > tol) return ConicClass::kPointConic;
    return ConicClass::kParallelLines;
  }
  return ConicClass::kNondegenerateConic;
}

Point2 conic_center(const SymMat3& q, double tol) {
  const Eigen::Matrix3d n = normalized(q);
  const Eigen::Matrix2d s = n.topLeftCorner<2, 2>();
  if (std::abs(s.determinant()) <= tol) {
    throw Error(ErrorCode::kSingularCenter, "conic quadratic block is singular");
  }
  return -s.inverse() * n.topRightCorner<2, 1>();
}

std::array<Line2, 2> conic_line_pair(const SymMat3& q, double tol) {
  if (classify_conic(q, tol) != ConicClass::kDegenerateLinePair) {
    throw Error(ErrorCode::kSingularCenter, "conic is not a crossing line pair");
  }
  const Point2 center = conic_center(q, tol);
  const Eigen::Matrix3d n = normalized(q);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(n.topLeftCorner<2, 2>());
  // Ascending eigenvalues: l1 < 0 < l2. Directions u with u^T S u = 0.
  const double l1 = es.eigenvalues()(0);
  const double l2 = es.eigenvalues()(1);
  const Point2 e1 = es.eigenvectors().col(0);
  const Point2 e2 = es.eigenvectors().col(1);
  const Point2 u_plus = std::sqrt(l2) * e1 + std::sqrt(-l1) * e2;
  const Point2 u_minus = std::sqrt(l2) * e1 - std::sqrt(-l1) * e2;
  return {Line2::from_point_direction(center, u_plus),
          Line2::from_point_direction(center, u_minus)};
}

double conic_value(const SymMat3& q, const Point2& p) {
  const Vector3 h(p.x(), p.y(), 1.0);
  return h.dot(q.matrix() * h);
}

Vector3 line_coefficients(const Line2& l) {
  const Point2 n = l.normal();
  return {n.x(), n.y(), -n.dot(l.point)};
}

}  // namespace constructa
