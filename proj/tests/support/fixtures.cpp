#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "constructa/unicycle.hpp"

namespace constructa::fixtures {

namespace {

const RigidTransform2 kTruth(1.0, 2.0, 0.7);

Point2 to_world(const RigidTransform2& t, const Point2& p) {
  const double c = std::cos(t.phi);
  const double s = std::sin(t.phi);
  return {c * p.x() - s * p.y() + t.dx, s * p.x() + c * p.y() + t.dy};
}

Point2 to_vehicle(const RigidTransform2& t, const Point2& w) {
  const double c = std::cos(t.phi);
  const double s = std::sin(t.phi);
  const Point2 d = w - Point2(t.dx, t.dy);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

// Builds a scenario from world-frame points so the geometric condition of a
// fixture is stated where it is easiest to see.
Scenario from_world(const std::vector<Point2>& anchors, const std::vector<Point2>& world,
                    const std::vector<int>& schedule, const RigidTransform2& truth = kTruth) {
  std::vector<Point2> v;
  for (const auto& w : world) v.push_back(to_vehicle(truth, w));
  return make_scenario(anchors, v, schedule, truth);
}

double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

Scenario make_scenario(const std::vector<Point2>& anchors, const std::vector<Point2>& points,
                       const std::vector<int>& schedule, const RigidTransform2& truth) {
  Scenario s;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    s.anchors.push_back({static_cast<int>(i + 1), anchors[i]});
  }
  s.trajectory.points = points;
  s.schedule = schedule;
  resynthesize(s, truth);
  return s;
}

void resynthesize(Scenario& s, const RigidTransform2& truth) {
  std::vector<double> rho;
  for (std::size_t k = 0; k < s.size(); ++k) {
    rho.push_back((to_world(truth, s.point(k)) - s.anchor_at(k).position).norm());
  }
  s.rho = rho;
  s.truth = truth;
}

std::vector<Fixture> taxonomy_fixtures() {
  const Point2 b1(0, 0), b2(6, 1), b3(2, 7), b4(-4, 3);
  const Point2 q0(1, 0), q1(2, 1), q2(0, 2), q3(3, 3), q4(4, 0), q5(4, 1);
  return {
      {"C1", make_scenario({b1}, {q0, q0}, {1, 1}), IndClass::family(2, 1)},
      {"C2", make_scenario({b1}, {q0, q1}, {1, 1}), IndClass::family(1, 2)},
      {"C3", make_scenario({b1}, {q0, q1, q2}, {1, 1, 1}), IndClass::family(1, 1)},
      {"1+1", make_scenario({b1, b2}, {q0, q1}, {1, 2}), IndClass::family(1, 2)},
      {"2+1", make_scenario({b1, b2}, {q0, q1, q3}, {1, 1, 2}), IndClass::finite(4)},
      {"3+1", make_scenario({b1, b2}, {q0, q1, q2, q3}, {1, 1, 1, 2}), IndClass::finite(2)},
      {"1+1+1", make_scenario({b1, b2, b3}, {q0, q1, q3}, {1, 2, 3}), IndClass::finite(2)},
      {"2+2", make_scenario({b1, b2}, {q0, q1, q3, q4}, {1, 1, 2, 2}), IndClass::finite(1)},
      {"2+1+1", make_scenario({b1, b2, b3}, {q0, q1, q3, q4}, {1, 1, 2, 3}), IndClass::finite(1)},
      {"3+2", make_scenario({b1, b2}, {q0, q1, q2, q3, q5}, {1, 1, 1, 2, 2}), IndClass::finite(1)},
      {"3+1+1", make_scenario({b1, b2, b3}, {q0, q1, q2, q3, q4}, {1, 1, 1, 2, 3}), IndClass::finite(1)},
      {"1+1+1+1", make_scenario({b1, b2, b3, b4}, {q0, q1, q3, q4}, {1, 2, 3, 4}), IndClass::finite(1)},
  };
}

Scenario case1_fixture() {
  return from_world({{0, 0}, {10, 0}}, {{3, 0}, {6, 0}}, {1, 2});
}

Scenario case2_fixture() {
  // Third point traced while P0 sweeps circle(B1, r0) and P1 follows on
  // circle(B2, r1) at the rigid distance; the range to B3 is set to the
  // closest approach of that trace.
  Scenario s = make_scenario({{0, 0}, {6, 1}, {2, 7}}, {{1, 0}, {2, 1}, {3, 3}}, {1, 2, 3});
  const auto& rho = *s.rho;
  const Point2 b1 = s.anchors[0].position, b2 = s.anchors[1].position, b3 = s.anchors[2].position;
  const double seg = (s.point(1) - s.point(0)).norm();
  auto dist = [&](double phi, int branch) {
    const Point2 p0 = b1 + rho[0] * Point2(std::cos(phi), std::sin(phi));
    const auto p1s = ref_circle_points(p0, seg, b2, rho[1]);
    if (p1s.size() < 2) return 1e9;
    const Point2 p1 = p1s[static_cast<std::size_t>(branch)];
    const RigidTransform2 t = ref_register({s.point(0), s.point(1)}, {p0, p1});
    return (to_world(t, s.point(2)) - b3).norm();
  };
  double best = 1e9;
  double best_phi = 0.0;
  int best_branch = 0;
  const int n = 20000;
  for (int branch = 0; branch < 2; ++branch) {
    for (int i = 0; i < n; ++i) {
      const double phi = -kPi + kTwoPi * i / n;
      const double d = dist(phi, branch);
      if (d < best) {
        best = d;
        best_phi = phi;
        best_branch = branch;
      }
    }
  }
  const double h = kTwoPi / n;
  const double phi =
      golden_min([&](double p) { return dist(p, best_branch); }, best_phi - h, best_phi + h);
  (*s.rho)[2] = dist(phi, best_branch);
  // The tangent placement replaces the original truth.
  const Point2 p0 = b1 + rho[0] * Point2(std::cos(phi), std::sin(phi));
  const Point2 p1 = ref_circle_points(p0, seg, b2, rho[1])[static_cast<std::size_t>(best_branch)];
  s.truth = ref_register({s.point(0), s.point(1)}, {p0, p1});
  return s;
}

Scenario case3_fixture() {
  // Virtual anchor candidates (0.5, -2) and (0.5, 2); the third point is 11 =
  // D + rho from the first and farther from the second, so only one tangent
  // placement exists.
  Scenario s;
  s.anchors = {{1, {0, 0}}, {2, {8, 0}}};
  s.trajectory.points = {{0, 0}, {1, 0}, {0.5, -13}};
  s.schedule = {1, 1, 2};
  const double r = std::sqrt(0.25 + 4.0);
  s.rho = std::vector<double>{r, r, 3.0};
  s.truth = RigidTransform2(-2.0, -0.5, kPi / 2);
  return s;
}

Scenario case4_fixture() {
  // Pivot 3-set around the first anchor with the fourth point at distance
  // 8 = D + rho3 from it.
  return from_world({{0, 0}, {6, 0}}, {{1, 0}, {0, 1}, {-1, -1}, {8, 0}}, {1, 1, 1, 2});
}

Scenario rotation_pathology_fixture(bool third_anchor) {
  std::vector<Point2> anchors{{0, 0}, {5, 3}};
  std::vector<Point2> world{{1, 1}, {2, -1}, {-1, 2}, {3, 0}, {6, 0}};
  std::vector<int> schedule{1, 1, 1, 2, 2};
  if (third_anchor) {
    anchors.push_back({-4, -2.4});
    world.push_back({4.5, 0});
    schedule.push_back(3);
  }
  return from_world(anchors, world, schedule);
}

Scenario translation_pathology_fixture(bool third_anchor) {
  std::vector<Point2> anchors{{0, 0}, {5, 0}};
  std::vector<Point2> world{{0, 2}, {3, 2}, {5, 2}, {8, 2}};
  std::vector<int> schedule{1, 1, 2, 2};
  if (third_anchor) {
    anchors.push_back({-4, 0});
    world.push_back({-3, 2});
    schedule.push_back(3);
  }
  return from_world(anchors, world, schedule);
}

Scenario unicycle_fixture(std::uint64_t seed, int measurements, int anchors) {
  Rng rng(seed);
  UnicycleControls c;
  const int segments = rng.integer(1, 4);
  double horizon = 0.0;
  for (int i = 0; i < segments; ++i) {
    c.segments.push_back({rng.uniform(0.3, 2.0), rng.uniform(-0.6, 0.6), rng.uniform(1.0, 5.0)});
    horizon += c.segments.back().duration;
  }
  std::vector<double> times;
  for (int k = 0; k < measurements; ++k) times.push_back(horizon * (k + 0.5) / measurements);
  Scenario s;
  for (int i = 0; i < anchors; ++i) s.anchors.push_back({i + 1, rng.point(8.0)});
  for (int k = 0; k < measurements; ++k) s.schedule.push_back(1 + k % anchors);
  s.trajectory = controls_to_trajectory_v(c, times);
  s.controls = c;
  s.sample_times = times;
  resynthesize(s, rng.transform(3.0));
  return s;
}

std::vector<Point2> separated_points(Rng& rng, int n, double lo, double hi, double sep,
                                     const std::vector<Point2>& avoid) {
  std::vector<Point2> out;
  while (static_cast<int>(out.size()) < n) {
    const Point2 p = rng.point_in(lo, hi);
    bool ok = true;
    for (const auto& q : out) ok = ok && (p - q).norm() >= sep;
    for (const auto& q : avoid) ok = ok && (p - q).norm() >= sep;
    if (ok) out.push_back(p);
  }
  return out;
}

std::vector<Point2> ref_circle_points(const Point2& ca, double ra, const Point2& cb, double rb) {
  const double d = (cb - ca).norm();
  if (d <= 0.0 || d > ra + rb || d < std::abs(ra - rb)) return {};
  const double cos_t = std::clamp((ra * ra + d * d - rb * rb) / (2.0 * ra * d), -1.0, 1.0);
  const double t = std::acos(cos_t);
  const double base = std::atan2(cb.y() - ca.y(), cb.x() - ca.x());
  return {ca + ra * Point2(std::cos(base + t), std::sin(base + t)),
          ca + ra * Point2(std::cos(base - t), std::sin(base - t))};
}

RigidTransform2 ref_register(const std::vector<Point2>& v, const std::vector<Point2>& w) {
  Point2 cv = Point2::Zero(), cw = Point2::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) {
    cv += v[i];
    cw += w[i];
  }
  cv /= static_cast<double>(v.size());
  cw /= static_cast<double>(w.size());
  double sin_sum = 0.0, cos_sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i] - cv;
    const Point2 b = w[i] - cw;
    cos_sum += a.dot(b);
    sin_sum += a.x() * b.y() - a.y() * b.x();
  }
  const double phi = std::atan2(sin_sum, cos_sum);
  const Point2 rc = Point2(std::cos(phi) * cv.x() - std::sin(phi) * cv.y(),
                           std::sin(phi) * cv.x() + std::cos(phi) * cv.y());
  const Point2 d = cw - rc;
  return {d.x(), d.y(), phi};
}

double ref_max_residual(const Scenario& s, const RigidTransform2& t) {
  double worst = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double r = (to_world(t, s.point(k)) - s.anchor_at(k).position).norm();
    worst = std::max(worst, std::abs(r - (*s.rho)[k]));
  }
  return worst;
}

bool ref_same(const RigidTransform2& a, const RigidTransform2& b, double tol_m, double tol_rad) {
  double dphi = std::fmod(a.phi - b.phi, kTwoPi);
  if (dphi > kPi) dphi -= kTwoPi;
  if (dphi < -kPi) dphi += kTwoPi;
  return std::abs(a.dx - b.dx) <= tol_m && std::abs(a.dy - b.dy) <= tol_m && std::abs(dphi) <= tol_rad;
}

double ref_min_singular(const Scenario& s, const RigidTransform2& t) {
  const double h = 1e-6;
  Eigen::MatrixXd j(static_cast<Eigen::Index>(s.size()), 3);
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(c) = h;
    const RigidTransform2 tp(t.dx + e(0), t.dy + e(1), t.phi + e(2));
    const RigidTransform2 tm(t.dx - e(0), t.dy - e(1), t.phi - e(2));
    for (std::size_t k = 0; k < s.size(); ++k) {
      const Point2 b = s.anchor_at(k).position;
      j(static_cast<Eigen::Index>(k), c) =
          ((to_world(tp, s.point(k)) - b).norm() - (to_world(tm, s.point(k)) - b).norm()) / (2 * h);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

Eigen::Matrix3d ref_gramian(const Scenario& s, const RigidTransform2& t) {
  const Point2 pf = to_world(t, s.point(s.size() - 1));
  const double h = 1e-6;
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Point2 pk = to_world(t, s.point(k));
    const Point2 b = s.anchor_at(k).position;
    // Range after perturbing the final pose by (ex, ey, eth), the trajectory
    // moving rigidly with it.
    auto range = [&](double ex, double ey, double eth) {
      const Point2 d = pk - pf;
      const Point2 rd(std::cos(eth) * d.x() - std::sin(eth) * d.y(),
                      std::sin(eth) * d.x() + std::cos(eth) * d.y());
      return (pf + Point2(ex, ey) + rd - b).norm();
    };
    const Eigen::Vector3d gamma((range(h, 0, 0) - range(-h, 0, 0)) / (2 * h),
                                (range(0, h, 0) - range(0, -h, 0)) / (2 * h),
                                (range(0, 0, h) - range(0, 0, -h)) / (2 * h));
    g += s.anchor_at(k).weight * gamma * gamma.transpose();
  }
  return g;
}

int ref_rank(const Eigen::Matrix3d& m, double rel) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  int r = 0;
  for (int i = 0; i < 3; ++i) r += es.eigenvalues()(i) > rel * top && top > 0.0;
  return r;
}

}  // namespace constructa::fixtures
