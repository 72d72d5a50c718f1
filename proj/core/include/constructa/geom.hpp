#pragma once

// Planar primitives shared by every analysis: points, roto-translations,
// circles, lines and the small amount of conic handling needed to extract
// critical line pairs.

#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include <Eigen/Core>

namespace constructa {

using Point2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

/// Signed wrapped difference a - b in [-pi, pi).
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

/// 2-D cross product a.x * b.y - a.y * b.x.
inline double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Counter-clockwise quarter turn of v.
inline Point2 perp(const Point2& v) { return {-v.y(), v.x()}; }

inline Point2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double polar_angle(const Point2& v) { return std::atan2(v.y(), v.x()); }

/// Roto-translation p -> R(phi) p + [dx, dy] mapping the vehicle frame into
/// the world frame. phi is kept in [-pi, pi).
struct RigidTransform2 {
  double dx = 0.0;
  double dy = 0.0;
  double phi = 0.0;

  RigidTransform2() = default;
  RigidTransform2(double dx_in, double dy_in, double phi_in)
      : dx(dx_in), dy(dy_in), phi(wrap_angle(phi_in)) {}

  static RigidTransform2 identity() { return {}; }

  Eigen::Matrix2d rotation() const;
  Point2 translation() const { return {dx, dy}; }
  Vector3 as_vector() const { return {dx, dy, phi}; }
  static RigidTransform2 from_vector(const Vector3& v) { return {v(0), v(1), v(2)}; }

  bool operator==(const RigidTransform2&) const = default;
};

Point2 apply_transform(const RigidTransform2& t, const Point2& p);

/// (a o b)(p) = a(b(p)).
RigidTransform2 compose(const RigidTransform2& a, const RigidTransform2& b);
RigidTransform2 inverse(const RigidTransform2& t);

/// The unique transform sending a_v -> a_w and whose rotation aligns
/// (b_v - a_v) with (b_w - a_w). Lengths are not checked; a_v != b_v required.
RigidTransform2 transform_from_correspondences(const Point2& a_v, const Point2& b_v,
                                               const Point2& a_w, const Point2& b_w);

/// True when the translations and wrapped angles agree within the given
/// tolerances.
bool same_transform(const RigidTransform2& a, const RigidTransform2& b, double tol_m,
                    double tol_rad);

struct Circle {
  Point2 center = Point2::Zero();
  double radius = 0.0;
};

struct Line2 {
  Point2 point = Point2::Zero();
  Point2 direction = Point2::UnitX();  // unit norm

  static Line2 through(const Point2& a, const Point2& b);
  static Line2 from_point_direction(const Point2& p, const Point2& d);
  /// Line {x : n . x + c = 0}; n need not be normalized.
  static Line2 from_coefficients(double a, double b, double c);

  Point2 normal() const { return perp(direction); }
  Point2 at(double s) const { return point + s * direction; }
};

struct CircleIntersection {
  enum class Kind { kEmpty, kTangent, kPair, kCoincident };

  Kind kind = Kind::kEmpty;
  // Tangent fills points[0]; Pair fills both, points[0] lies to the left of
  // the center-a -> center-b direction.
  std::array<Point2, 2> points{Point2::Zero(), Point2::Zero()};

  int count() const {
    return kind == Kind::kPair ? 2 : (kind == Kind::kTangent ? 1 : 0);
  }
};

CircleIntersection circle_circle_intersect(const Circle& a, const Circle& b, double tol);

/// Points are collinear when the largest distance to their principal line is
/// within tol (meters). Coincident sets are collinear.
bool collinear(std::span<const Point2> points, double tol);

double point_line_distance(const Point2& p, const Line2& l);

/// Signed distance along the line normal.
double signed_distance(const Point2& p, const Line2& l);

Line2 perpendicular_bisector(const Point2& a, const Point2& b);

/// Symmetric 3x3 matrix. Construction from a general matrix keeps the
/// symmetric part only.
class SymMat3 {
 public:
  SymMat3() : m_(Eigen::Matrix3d::Zero()) {}
  explicit SymMat3(const Eigen::Matrix3d& m) : m_(0.5 * (m + m.transpose())) {}

  static SymMat3 zero() { return SymMat3(); }
  static SymMat3 outer(const Vector3& v) { return SymMat3(v * v.transpose()); }
  /// Symmetric product of two homogeneous vectors, (u v^T + v u^T) / 2.
  static SymMat3 symmetric_product(const Vector3& u, const Vector3& v);

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  SymMat3& operator+=(const SymMat3& o) {
    m_ += o.m_;
    return *this;
  }
  friend SymMat3 operator+(SymMat3 a, const SymMat3& b) { return a += b; }
  friend SymMat3 operator*(double s, const SymMat3& a) { return SymMat3(s * a.m_); }

  /// Conic view [x y 1] Q [x y 1]^T: quadratic block S, linear part b, constant c.
  Eigen::Matrix2d quadratic_block() const { return m_.topLeftCorner<2, 2>(); }
  Eigen::Vector2d linear_part() const { return m_.topRightCorner<2, 1>(); }
  double constant() const { return m_(2, 2); }

  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

 private:
  Eigen::Matrix3d m_;
};

enum class ConicClass {
  kDegenerateLinePair,  // two real lines crossing at the center
  kWholePlane,          // Q = 0
  kNondegenerateConic,
  kPointConic,          // degenerate with det S > 0: a single real point
  kParallelLines,       // degenerate with det S = 0 (parallel, double or no lines)
};

/// Sign tests run on Q scaled to unit max-abs entry, so the result does not
/// change when Q is multiplied by a nonzero constant. The WholePlane test uses
/// the raw entries.
ConicClass classify_conic(const SymMat3& q, double tol);

/// -S^{-1} b. Throws Error(kSingularCenter) when det S is within tol of zero
/// (after normalization).
Point2 conic_center(const SymMat3& q, double tol);

/// The two lines of a DegenerateLinePair conic, through its center.
/// Throws Error(kSingularCenter) for other classes.
std::array<Line2, 2> conic_line_pair(const SymMat3& q, double tol);

/// Evaluates [x y 1] Q [x y 1]^T.
double conic_value(const SymMat3& q, const Point2& p);

/// Homogeneous coefficients (a, b, c) of a line with a x + b y + c = 0.
Vector3 line_coefficients(const Line2& l);

}  // namespace constructa
