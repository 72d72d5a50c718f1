#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "constructa/geom.hpp"
#include "constructa/scenario.hpp"

namespace constructa {

/// Number of roto-translations indistinguishable from the true one: either a
/// finite count or `multiplicity` disjoint continuous families of the given
/// dimension.
struct IndClass {
  enum class Kind { kFinite, kFamily };

  Kind kind = Kind::kFinite;
  int count = 1;         // kFinite
  int dimension = 0;     // kFamily: 1 or 2
  int multiplicity = 1;  // kFamily

  static IndClass finite(int n) { return {Kind::kFinite, n, 0, 1}; }
  static IndClass family(int dim, int multiplicity) { return {Kind::kFamily, 0, dim, multiplicity}; }

  bool is_finite() const { return kind == Kind::kFinite; }
  bool unique() const { return is_finite() && count == 1; }

  /// "Ind(4)", "Ind(∞)", "Ind(2×∞)", "Ind(∞×∞)".
  std::string str() const;

  bool operator==(const IndClass&) const = default;
};

struct Solution {
  RigidTransform2 transform;
  double residual_norm = 0.0;
  int jacobian_rank = 0;
};

struct FamilyInfo {
  int dimension = 1;
  int multiplicity = 1;
  std::string description;
};

struct SolutionSet {
  std::vector<Solution> solutions;  // sorted by (phi, dx, dy)
  std::optional<FamilyInfo> family;
  std::optional<IndClass> ind;      // empty when nothing was found
  std::vector<std::string> warnings;

  std::size_t size() const { return solutions.size(); }
  bool empty() const { return solutions.empty(); }
};

struct GridConfig {
  double half_extent = 0.0;  // m; 0 selects a bound that provably covers every solution
  double cell = 0.0;         // m; 0 selects 2 * half_extent / 200
  int phi_cells = 360;
  std::optional<Point2> center;  // defaults to the anchor centroid
};

struct SolverConfig {
  double accept_tol = 1e-7;
  double dedup_m = 1e-5;
  double dedup_rad = 1e-5;
  int n_starts = 1024;
  GridConfig grid;
  int max_iterations = 200;
  double damping_init = 1e-3;
  double damping_up = 10.0;
  double damping_down = 10.0;
  double rank_tol = 1e-8;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  /// Defaults with the dedup and rank tolerances taken from the scenario.
  static SolverConfig for_scenario(const Scenario& s);
};

/// r_k = |apply(t, P_k) - B_k| - rho_k. Error(kMissingMeasurements) without ranges.
Eigen::VectorXd residuals(const Scenario& s, const RigidTransform2& t);

/// Rows d r_k / d(dx, dy, phi) = [u_k, (R P_k) x u_k] with u_k the unit
/// vector from the anchor to the world point (zero row when they coincide).
Eigen::MatrixX3d residual_jacobian(const Scenario& s, const RigidTransform2& t);

/// Singular values below rank_tol * largest count as zero.
int numerical_rank(const Eigen::MatrixXd& m, double rank_tol);

/// Damped Gauss-Newton from `start`. With `fixed_phi` the rotation is held at
/// start.phi and only the translation moves.
Solution refine(const Scenario& s, const RigidTransform2& start, const SolverConfig& cfg,
                bool fixed_phi = false);

/// Drops near-duplicates (keeping the lowest residual) and sorts by (phi, dx, dy).
void dedup_and_sort(std::vector<Solution>& sols, double tol_m, double tol_rad);

/// Axis-aligned search box over (dx, dy) shared by multistart and oracle.
struct SearchBox {
  Point2 center = Point2::Zero();
  double half_extent = 1.0;
};

SearchBox search_box(const Scenario& s, const GridConfig& grid);

/// Multi-start damped least squares from a seeded low-discrepancy sequence
/// over the search box and [-pi, pi). Continuous families are detected and
/// summarized in `family` with a bounded set of representatives.
SolutionSet solve_multistart(const Scenario& s, const SolverConfig& cfg);

/// Local dimension (0, 1 or 2) of the zero set through `sol`, estimated by
/// projecting small random perturbations back onto the zero set.
int local_family_dimension(const Scenario& s, const RigidTransform2& sol, const SolverConfig& cfg);

/// Finite(n) for isolated solutions, a family class otherwise; nullopt for
/// an empty set.
std::optional<IndClass> count_indistinguishable(const SolutionSet& ss);

/// Randomized Halton point in [0,1)^3 (bases 2, 3, 5) used for starts.
Eigen::Vector3d halton3(std::uint64_t index, const Eigen::Vector3d& shift);

}  // namespace constructa
