#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "constructa/scenario.hpp"
#include "constructa/solver.hpp"

namespace constructa {

/// Regular grid over (dx, dy, phi). Cell (i, j, l) is centered at
/// (x0 + i h, y0 + j h, -pi + (l + 1/2) h_phi).
struct OracleGrid {
  Point2 origin = Point2::Zero();  // center of cell (0, 0)
  double cell = 0.0;
  int nx = 0;
  int ny = 0;
  int n_phi = 0;

  double phi_step() const { return kTwoPi / n_phi; }
  double phi_at(int l) const { return -kPi + (l + 0.5) * phi_step(); }
  Point2 xy_at(int i, int j) const { return origin + cell * Point2(i, j); }
};

OracleGrid oracle_grid(const Scenario& s, const GridConfig& cfg);

struct OracleCell {
  int i = 0;
  int j = 0;
  int l = 0;
  double score = 0.0;  // max_k |r_k| / threshold_k
  int cluster = -1;
};

struct OracleCluster {
  int id = 0;
  std::size_t cells = 0;
  int box_dimension = 0;   // from neighborhood growth around the best cell
  bool family = false;
  std::vector<Solution> refined;
};

struct OracleOutcome {
  OracleGrid grid;
  std::vector<OracleCell> cells;  // candidate cells sorted by (l, i, j)
  std::vector<OracleCluster> clusters;
  SolutionSet solutions;
};

/// Exhaustive grid evaluation. A cell is a candidate when every residual at
/// its center is within the largest change any point of the cell can cause,
/// so no solution inside the grid is missed. Candidates are clustered by
/// 26-connectivity (phi wraps), each cluster is refined by damped least
/// squares, and clusters that refine to a spread of distinct points are
/// reported as continuous families.
OracleOutcome run_oracle(const Scenario& s, const SolverConfig& cfg);

SolutionSet brute_force_oracle(const Scenario& s, const SolverConfig& cfg);

struct Agreement {
  bool agree = false;
  std::string detail;
};

/// Same Ind class and, for finite sets, a one-to-one match of transforms
/// within the dedup tolerances.
Agreement compare_solution_sets(const SolutionSet& a, const SolutionSet& b, double tol_m,
                                double tol_rad);

}  // namespace constructa
