#include "constructa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "constructa/error.hpp"
#include "constructa/parallel.hpp"

namespace constructa {

namespace {

constexpr double kFamilyProbe = 1e-3;
constexpr int kFamilyProbes = 8;
constexpr int kFamilyChecks = 12;
constexpr int kSliceStarts = 128;
constexpr int kSlices = 9;
constexpr std::size_t kMaxRepresentatives = 64;

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

Eigen::Vector3d start_shift(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng);
  const double b = u(rng);
  const double c = u(rng);
  return {a, b, c};
}

RigidTransform2 start_transform(const SearchBox& box, const Eigen::Vector3d& u) {
  return {box.center.x() + (2.0 * u(0) - 1.0) * box.half_extent,
          box.center.y() + (2.0 * u(1) - 1.0) * box.half_extent, -kPi + kTwoPi * u(2)};
}

std::vector<Solution> accepted(const std::vector<Solution>& all, double accept_tol) {
  std::vector<Solution> out;
  for (const auto& s : all) {
    if (s.residual_norm <= accept_tol) out.push_back(s);
  }
  return out;
}

int slice_count(const Scenario& s, double phi, const SolverConfig& cfg, const SearchBox& box) {
  const Eigen::Vector3d shift = start_shift(cfg.seed ^ 0x5bd1e995ULL);
  std::vector<Solution> found(kSliceStarts);
  for (int i = 0; i < kSliceStarts; ++i) {
    RigidTransform2 st = start_transform(box, halton3(static_cast<std::uint64_t>(i) + 1, shift));
    st.phi = wrap_angle(phi);
    found[static_cast<std::size_t>(i)] = refine(s, st, cfg, true);
  }
  auto ok = accepted(found, cfg.accept_tol);
  dedup_and_sort(ok, std::max(cfg.dedup_m, 1e3 * cfg.accept_tol), cfg.dedup_rad);
  return static_cast<int>(ok.size());
}

int mode_prefer_larger(const std::vector<int>& values) {
  std::map<int, int> hist;
  for (int v : values) ++hist[v];
  int best = 0;
  int best_count = -1;
  for (const auto& [v, c] : hist) {
    if (c >= best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

}  // namespace

std::string IndClass::str() const {
  if (kind == Kind::kFinite) return "Ind(" + std::to_string(count) + ")";
  if (dimension >= 2) return "Ind(∞×∞)";
  if (multiplicity == 1) return "Ind(∞)";
  return "Ind(" + std::to_string(multiplicity) + "×∞)";
}

SolverConfig SolverConfig::for_scenario(const Scenario& s) {
  SolverConfig cfg;
  cfg.dedup_m = s.tolerances.dedup;
  cfg.dedup_rad = s.tolerances.dedup;
  cfg.rank_tol = s.tolerances.rank;
  if (s.synthesis && s.synthesis->noise_std > 0.0) {
    // Least-squares residual of noisy ranges grows like sigma * sqrt(N).
    const double n = static_cast<double>(std::max<std::size_t>(1, s.size()));
    cfg.accept_tol = std::max(cfg.accept_tol, 5.0 * s.synthesis->noise_std * std::sqrt(n));
  }
  return cfg;
}

Eigen::VectorXd residuals(const Scenario& s, const RigidTransform2& t) {
  const auto& rho = s.ranges();
  Eigen::VectorXd r(static_cast<Eigen::Index>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) {
    r(static_cast<Eigen::Index>(k)) =
        (apply_transform(t, s.point(k)) - s.anchor_at(k).position).norm() - rho[k];
  }
  return r;
}

Eigen::MatrixX3d residual_jacobian(const Scenario& s, const RigidTransform2& t) {
  Eigen::MatrixX3d j(static_cast<Eigen::Index>(s.size()), 3);
  const Eigen::Matrix2d rot = t.rotation();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const Point2 rp = rot * s.point(k);
    const Point2 diff = rp + t.translation() - s.anchor_at(k).position;
    const double n = diff.norm();
    if (n == 0.0) {
      j.row(row).setZero();
      continue;
    }
    const Point2 u = diff / n;
    j(row, 0) = u.x();
    j(row, 1) = u.y();
    j(row, 2) = cross(rp, u);
  }
  return j;
}

int numerical_rank(const Eigen::MatrixXd& m, double rank_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_tol * sv(0)) ++rank;
  }
  return rank;
}

Solution refine(const Scenario& s, const RigidTransform2& start, const SolverConfig& cfg,
                bool fixed_phi) {
  Eigen::Vector3d x = start.as_vector();
  Eigen::VectorXd r = residuals(s, start);
  double cost = r.squaredNorm();
  double lambda = cfg.damping_init;
  const int dims = fixed_phi ? 2 : 3;

  for (int it = 0; it < cfg.max_iterations && cost > 1e-30; ++it) {
    const Eigen::MatrixX3d j = residual_jacobian(s, RigidTransform2::from_vector(x));
    const Eigen::MatrixXd jj = j.leftCols(dims);
    const Eigen::MatrixXd a = jj.transpose() * jj;
    const Eigen::VectorXd g = jj.transpose() * r;
    bool improved = false;
    double step_norm = 0.0;
    while (lambda < 1e12) {
      const Eigen::MatrixXd damped = a + lambda * Eigen::MatrixXd::Identity(dims, dims);
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      Eigen::Vector3d trial = x;
      trial.head(dims) += delta;
      trial(2) = wrap_angle(trial(2));
      const Eigen::VectorXd r_trial = residuals(s, RigidTransform2::from_vector(trial));
      const double c_trial = r_trial.squaredNorm();
      if (c_trial < cost) {
        x = trial;
        r = r_trial;
        cost = c_trial;
        lambda = std::max(lambda / cfg.damping_down, 1e-15);
        step_norm = delta.norm();
        improved = true;
        break;
      }
      lambda *= cfg.damping_up;
    }
    if (!improved || step_norm < 1e-14 * (1.0 + x.head<2>().norm())) break;
  }

  Solution sol;
  sol.transform = RigidTransform2::from_vector(x);
  sol.residual_norm = r.norm();
  sol.jacobian_rank = numerical_rank(residual_jacobian(s, sol.transform), cfg.rank_tol);
  return sol;
}

void dedup_and_sort(std::vector<Solution>& sols, double tol_m, double tol_rad) {
  std::stable_sort(sols.begin(), sols.end(), [](const Solution& a, const Solution& b) {
    return a.residual_norm < b.residual_norm;
  });
  std::vector<Solution> kept;
  for (const auto& s : sols) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const Solution& k) {
      return same_transform(k.transform, s.transform, tol_m, tol_rad);
    });
    if (!dup) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(), [](const Solution& a, const Solution& b) {
    const auto& x = a.transform;
    const auto& y = b.transform;
    if (x.phi != y.phi) return x.phi < y.phi;
    if (x.dx != y.dx) return x.dx < y.dx;
    return x.dy < y.dy;
  });
  sols = std::move(kept);
}

SearchBox search_box(const Scenario& s, const GridConfig& grid) {
  SearchBox box;
  Point2 centroid = Point2::Zero();
  for (const auto& a : s.anchors) centroid += a.position;
  centroid /= static_cast<double>(s.anchors.size());
  box.center = grid.center.value_or(centroid);
  if (grid.half_extent > 0.0) {
    box.half_extent = grid.half_extent;
    return box;
  }
  // |t - c| <= |B_k - c| + rho_k + |P_k| for any transform matching range k.
  double anchor_span = 0.0;
  for (const auto& a : s.anchors) anchor_span = std::max(anchor_span, (a.position - box.center).norm());
  double reach = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double rho = s.rho ? (*s.rho)[k] : 0.0;
    reach = std::max(reach, rho + s.point(k).norm());
  }
  box.half_extent = std::max(1.0, anchor_span + reach);
  return box;
}

Eigen::Vector3d halton3(std::uint64_t index, const Eigen::Vector3d& shift) {
  Eigen::Vector3d u(radical_inverse(index, 2), radical_inverse(index, 3), radical_inverse(index, 5));
  for (int i = 0; i < 3; ++i) u(i) = std::fmod(u(i) + shift(i), 1.0);
  return u;
}

int local_family_dimension(const Scenario& s, const RigidTransform2& sol, const SolverConfig& cfg) {
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::Vector3d x0 = sol.as_vector();
  std::vector<Eigen::Vector3d> offsets;
  for (int i = 0; i < kFamilyProbes; ++i) {
    Eigen::Vector3d d(g(rng), g(rng), g(rng));
    d *= kFamilyProbe / d.norm();
    const Solution p = refine(s, RigidTransform2::from_vector(x0 + d), cfg);
    if (p.residual_norm > cfg.accept_tol) continue;
    Eigen::Vector3d off = p.transform.as_vector() - x0;
    off(2) = wrap_angle(off(2));
    offsets.push_back(off);
  }
  if (offsets.size() < 2) return 0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& o : offsets) cov += o * o.transpose();
  cov /= static_cast<double>(offsets.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const double largest = es.eigenvalues()(2);
  if (std::sqrt(std::max(largest, 0.0)) < 1e-2 * kFamilyProbe) return 0;
  int dim = 0;
  for (int i = 0; i < 3; ++i) {
    if (es.eigenvalues()(i) >= 1e-3 * largest) ++dim;
  }
  return std::min(dim, 2);
}

std::optional<IndClass> count_indistinguishable(const SolutionSet& ss) {
  if (ss.solutions.empty()) return std::nullopt;
  if (ss.family) return IndClass::family(ss.family->dimension, ss.family->multiplicity);
  return IndClass::finite(static_cast<int>(ss.solutions.size()));
}

SolutionSet solve_multistart(const Scenario& s, const SolverConfig& cfg) {
  s.ranges();
  const SearchBox box = search_box(s, cfg.grid);
  const Eigen::Vector3d shift = start_shift(cfg.seed);
  const auto n = static_cast<std::size_t>(std::max(1, cfg.n_starts));
  std::vector<Solution> runs(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        runs[i] = refine(s, start_transform(box, halton3(i + 1, shift)), cfg);
      },
      cfg.threads);

  SolutionSet out;
  out.solutions = accepted(runs, cfg.accept_tol);
  dedup_and_sort(out.solutions, cfg.dedup_m, cfg.dedup_rad);
  if (out.solutions.empty()) {
    out.warnings.push_back("NoSolutionFound: no start converged below the acceptance tolerance");
    return out;
  }

  std::vector<std::size_t> deficient;
  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    if (out.solutions[i].jacobian_rank < 3) deficient.push_back(i);
  }
  int dim = 0;
  if (!deficient.empty()) {
    const std::size_t checks = std::min<std::size_t>(deficient.size(), kFamilyChecks);
    std::vector<int> dims(checks, 0);
    parallel_for(
        checks,
        [&](std::size_t c) {
          const std::size_t idx = deficient[c * deficient.size() / checks];
          dims[c] = local_family_dimension(s, out.solutions[idx].transform, cfg);
        },
        cfg.threads);
    dim = *std::max_element(dims.begin(), dims.end());
  }

  if (dim > 0) {
    FamilyInfo fam;
    fam.dimension = dim;
    if (dim >= 2) {
      fam.multiplicity = 1;
      fam.description = "two-parameter family";
    } else {
      const std::size_t slices = std::min<std::size_t>(out.solutions.size(), kSlices);
      std::vector<int> counts(slices, 0);
      parallel_for(
          slices,
          [&](std::size_t c) {
            const std::size_t idx = c * out.solutions.size() / slices;
            counts[c] = slice_count(s, out.solutions[idx].transform.phi, cfg, box);
          },
          cfg.threads);
      fam.multiplicity = std::max(1, mode_prefer_larger(counts));
      fam.description = fam.multiplicity == 1
                            ? "one-parameter family"
                            : std::to_string(fam.multiplicity) + " one-parameter families";
    }
    out.family = fam;
    if (out.solutions.size() > kMaxRepresentatives) {
      std::vector<Solution> reps;
      for (std::size_t i = 0; i < kMaxRepresentatives; ++i) {
        reps.push_back(out.solutions[i * out.solutions.size() / kMaxRepresentatives]);
      }
      out.solutions = std::move(reps);
    }
  }
  out.ind = count_indistinguishable(out);
  return out;
}

}  // namespace constructa
