#include "constructa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "constructa/parallel.hpp"

namespace constructa {

namespace {

constexpr int kGrowthInner = 8;
constexpr int kGrowthOuter = 16;
constexpr std::size_t kMinimaSeeds = 16;
constexpr std::size_t kSpreadSeeds = 8;
constexpr double kDistinct = 1e-3;
constexpr std::size_t kMaxRepresentatives = 64;
constexpr std::size_t kSlices = 9;
constexpr std::size_t kSliceSeeds = 48;
constexpr double kSliceDistinct = 1e-4;
constexpr int kSurfaceSliceCount = 12;

using Key = std::int64_t;

Key key_of(const OracleGrid& g, int l, int i, int j) {
  return (static_cast<Key>(l) * g.nx + i) * g.ny + j;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

int phi_distance(int a, int b, int n) {
  const int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

int cell_distance(const OracleCell& a, const OracleCell& b, int n_phi) {
  return std::max({std::abs(a.i - b.i), std::abs(a.j - b.j), phi_distance(a.l, b.l, n_phi)});
}

// Candidate cells of one phi layer, in (i, j) order.
std::vector<OracleCell> scan_layer(const Scenario& s, const OracleGrid& g, int l,
                                   const std::vector<double>& thr, std::size_t pivot) {
  const auto& rho = s.ranges();
  const std::size_t n = s.size();
  const RigidTransform2 rot(0.0, 0.0, g.phi_at(l));
  std::vector<Point2> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    c[k] = s.anchor_at(k).position - apply_transform(rot, s.point(k));
  }
  std::vector<OracleCell> out;
  const double outer = rho[pivot] + thr[pivot];
  const double inner = rho[pivot] - thr[pivot];
  const Point2 cp = c[pivot];
  auto test_cell = [&](int i, int j) {
    const Point2 t = g.xy_at(i, j);
    double score = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = std::abs((t - c[k]).norm() - rho[k]) / thr[k];
      if (r > 1.0) return;
      score = std::max(score, r);
    }
    out.push_back({i, j, l, score, -1});
  };
  for (int i = 0; i < g.nx; ++i) {
    const double dx = g.origin.x() + i * g.cell - cp.x();
    const double reach = std::abs(dx) - 0.5 * g.cell;
    if (reach > outer) continue;
    const double dx2 = std::max(0.0, reach) * std::max(0.0, reach);
    const double ymax = std::sqrt(std::max(0.0, outer * outer - dx2)) + g.cell;
    double ymin = -1.0;
    const double far = std::abs(dx) + 0.5 * g.cell;
    if (inner > 0.0 && far < inner) ymin = std::sqrt(inner * inner - far * far) - g.cell;
    auto j_of = [&](double y) { return (y - g.origin.y()) / g.cell; };
    std::vector<std::pair<int, int>> ranges;
    auto add_range = [&](double ylo, double yhi) {
      const int jlo = std::max(0, static_cast<int>(std::floor(j_of(ylo))) - 1);
      const int jhi = std::min(g.ny - 1, static_cast<int>(std::ceil(j_of(yhi))) + 1);
      if (jlo <= jhi) ranges.emplace_back(jlo, jhi);
    };
    if (ymin > 0.0) {
      add_range(cp.y() - ymax, cp.y() - ymin);
      add_range(cp.y() + ymin, cp.y() + ymax);
      if (ranges.size() == 2 && ranges[0].second >= ranges[1].first) {
        ranges[0].second = ranges[1].second;
        ranges.pop_back();
      }
    } else {
      add_range(cp.y() - ymax, cp.y() + ymax);
    }
    for (const auto& [jlo, jhi] : ranges) {
      for (int j = jlo; j <= jhi; ++j) test_cell(i, j);
    }
  }
  return out;
}

template <typename Neighbors>
std::vector<std::size_t> local_minima(const std::vector<OracleCell>& cells,
                                      const std::vector<std::size_t>& members,
                                      const Neighbors& neighbors) {
  std::vector<std::size_t> minima;
  for (std::size_t m : members) {
    const auto nb = neighbors(m);
    const bool is_min = std::all_of(nb.begin(), nb.end(), [&](std::size_t q) {
      return cells[m].score <= cells[q].score;
    });
    if (is_min) minima.push_back(m);
  }
  std::stable_sort(minima.begin(), minima.end(),
                   [&](std::size_t a, std::size_t b) { return cells[a].score < cells[b].score; });
  if (minima.size() > kMinimaSeeds) minima.resize(kMinimaSeeds);
  return minima;
}

std::vector<std::size_t> spread_seeds(const std::vector<OracleCell>& cells,
                                      const std::vector<std::size_t>& members, std::size_t best,
                                      int n_phi) {
  std::vector<std::size_t> seeds{best};
  std::vector<int> dist(members.size());
  for (std::size_t a = 0; a < members.size(); ++a) {
    dist[a] = cell_distance(cells[members[a]], cells[best], n_phi);
  }
  while (seeds.size() < kSpreadSeeds) {
    const auto it = std::max_element(dist.begin(), dist.end());
    if (it == dist.end() || *it == 0) break;
    const std::size_t pick = members[static_cast<std::size_t>(it - dist.begin())];
    seeds.push_back(pick);
    for (std::size_t a = 0; a < members.size(); ++a) {
      dist[a] = std::min(dist[a], cell_distance(cells[members[a]], cells[pick], n_phi));
    }
  }
  return seeds;
}

Solution refine_cell(const Scenario& s, const OracleGrid& g, const OracleCell& c,
                     const SolverConfig& cfg) {
  const Point2 t = g.xy_at(c.i, c.j);
  return refine(s, RigidTransform2(t.x(), t.y(), g.phi_at(c.l)), cfg);
}

}  // namespace

OracleGrid oracle_grid(const Scenario& s, const GridConfig& cfg) {
  const SearchBox box = search_box(s, cfg);
  OracleGrid g;
  g.cell = cfg.cell > 0.0 ? cfg.cell : 2.0 * box.half_extent / 200.0;
  g.nx = static_cast<int>(std::floor(2.0 * box.half_extent / g.cell + 1e-9)) + 1;
  g.ny = g.nx;
  g.n_phi = std::max(1, cfg.phi_cells);
  g.origin = box.center - Point2(box.half_extent, box.half_extent);
  return g;
}

OracleOutcome run_oracle(const Scenario& s, const SolverConfig& cfg) {
  const auto& rho = s.ranges();
  OracleOutcome out;
  const OracleGrid g = oracle_grid(s, cfg.grid);
  out.grid = g;
  const std::size_t n = s.size();

  // Largest change of residual k between a cell center and any point of the cell.
  std::vector<double> thr(n);
  std::size_t pivot = 0;
  for (std::size_t k = 0; k < n; ++k) {
    thr[k] = (std::sqrt(0.5) * g.cell + s.point(k).norm() * 0.5 * g.phi_step()) * 1.001 + 1e-12 +
             cfg.accept_tol;
    if ((rho[k] + thr[k]) * thr[k] < (rho[pivot] + thr[pivot]) * thr[pivot]) pivot = k;
  }

  std::vector<std::vector<OracleCell>> layers(static_cast<std::size_t>(g.n_phi));
  parallel_for(
      layers.size(),
      [&](std::size_t l) { layers[l] = scan_layer(s, g, static_cast<int>(l), thr, pivot); },
      cfg.threads);
  for (auto& layer : layers) {
    out.cells.insert(out.cells.end(), layer.begin(), layer.end());
  }
  auto& cells = out.cells;
  if (cells.empty()) {
    out.solutions.warnings.push_back("NoSolutionFound: no grid cell passed the residual test");
    return out;
  }

  std::vector<Key> keys(cells.size());
  for (std::size_t a = 0; a < cells.size(); ++a) keys[a] = key_of(g, cells[a].l, cells[a].i, cells[a].j);
  auto neighbors = [&](std::size_t a) {
    std::vector<std::size_t> found;
    const auto& c = cells[a];
    for (int dl = -1; dl <= 1; ++dl) {
      const int l = (c.l + dl + g.n_phi) % g.n_phi;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (dl == 0 && di == 0 && dj == 0) continue;
          const int i = c.i + di;
          const int j = c.j + dj;
          if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) continue;
          const Key k = key_of(g, l, i, j);
          const auto it = std::lower_bound(keys.begin(), keys.end(), k);
          if (it == keys.end() || *it != k) continue;
          const auto b = static_cast<std::size_t>(it - keys.begin());
          if (b != a) found.push_back(b);
        }
      }
    }
    return found;
  };
  UnionFind uf(cells.size());
  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (std::size_t b : neighbors(a)) uf.unite(a, b);
  }

  std::map<std::size_t, int> root_to_id;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    const std::size_t r = uf.find(a);
    auto [it, inserted] = root_to_id.emplace(r, static_cast<int>(members.size()));
    if (inserted) members.emplace_back();
    cells[a].cluster = it->second;
    members[static_cast<std::size_t>(it->second)].push_back(a);
  }

  out.clusters.resize(members.size());
  parallel_for(
      members.size(),
      [&](std::size_t cid) {
        const auto& mem = members[cid];
        OracleCluster& cl = out.clusters[cid];
        cl.id = static_cast<int>(cid);
        cl.cells = mem.size();
        const std::size_t best = *std::min_element(mem.begin(), mem.end(), [&](auto a, auto b) {
          return cells[a].score < cells[b].score;
        });
        std::size_t inner = 0;
        std::size_t outer = 0;
        for (std::size_t m : mem) {
          const int d = cell_distance(cells[m], cells[best], g.n_phi);
          if (d <= kGrowthInner) ++inner;
          if (d <= kGrowthOuter) ++outer;
        }
        const double growth = static_cast<double>(outer) / static_cast<double>(inner);
        cl.box_dimension = growth < 1.4 ? 0 : (growth < 2.8 ? 1 : 2);

        std::vector<Solution> spread;
        for (std::size_t seed : spread_seeds(cells, mem, best, g.n_phi)) {
          const Solution sol = refine_cell(s, g, cells[seed], cfg);
          if (sol.residual_norm <= cfg.accept_tol) spread.push_back(sol);
        }
        std::vector<Solution> distinct = spread;
        dedup_and_sort(distinct, kDistinct, kDistinct);
        // Several isolated roots can share one elongated cluster; only a
        // spread of rank-deficient roots is a continuum.
        const auto singular = std::count_if(distinct.begin(), distinct.end(),
                                            [](const Solution& x) { return x.jacobian_rank < 3; });
        cl.family = cl.box_dimension >= 1 && singular >= 3;
        if (cl.family) {
          cl.refined = spread;
          dedup_and_sort(cl.refined, cfg.dedup_m, cfg.dedup_rad);
          return;
        }
        std::vector<Solution> sols = spread;
        for (std::size_t seed : local_minima(cells, mem, neighbors)) {
          const Solution sol = refine_cell(s, g, cells[seed], cfg);
          if (sol.residual_norm <= cfg.accept_tol) sols.push_back(sol);
        }
        dedup_and_sort(sols, cfg.dedup_m, cfg.dedup_rad);
        cl.refined = sols;
      },
      cfg.threads);

  SolutionSet& set = out.solutions;
  const bool any_family = std::any_of(out.clusters.begin(), out.clusters.end(),
                                      [](const OracleCluster& c) { return c.family; });
  if (any_family) {
    FamilyInfo fam;
    fam.dimension = 1;
    std::map<int, std::vector<std::size_t>> per_layer;
    for (const auto& cl : out.clusters) {
      if (!cl.family) continue;
      set.solutions.insert(set.solutions.end(), cl.refined.begin(), cl.refined.end());
      for (std::size_t m : members[static_cast<std::size_t>(cl.id)]) per_layer[cells[m].l].push_back(m);
    }
    // Branch count: distinct fixed-phi solutions seeded from the family cells
    // of a few evenly spread layers.
    std::vector<const std::vector<std::size_t>*> layer_cells;
    for (const auto& [l, mem] : per_layer) layer_cells.push_back(&mem);
    const std::size_t n_slices = std::min(layer_cells.size(), kSlices);
    std::vector<int> counts(n_slices, 0);
    parallel_for(
        n_slices,
        [&](std::size_t c) {
          const auto& mem = *layer_cells[c * layer_cells.size() / n_slices];
          const std::size_t seeds = std::min(mem.size(), kSliceSeeds);
          std::vector<Solution> found;
          for (std::size_t q = 0; q < seeds; ++q) {
            const OracleCell& cell = cells[mem[q * mem.size() / seeds]];
            const Point2 t = g.xy_at(cell.i, cell.j);
            const Solution sol =
                refine(s, RigidTransform2(t.x(), t.y(), g.phi_at(cell.l)), cfg, true);
            if (sol.residual_norm <= cfg.accept_tol) found.push_back(sol);
          }
          dedup_and_sort(found, kSliceDistinct, kSliceDistinct);
          counts[c] = static_cast<int>(found.size());
        },
        cfg.threads);
    // A two-parameter family leaves a continuum in every slice, so the seeds
    // refine to (nearly) as many distinct points as there were seeds.
    std::vector<int> sorted_counts = counts;
    std::sort(sorted_counts.begin(), sorted_counts.end());
    const int median = sorted_counts.empty() ? 0 : sorted_counts[sorted_counts.size() / 2];
    fam.dimension = median > kSurfaceSliceCount ? 2 : 1;
    std::map<int, int> hist;
    for (int c : counts) ++hist[c];
    int mult = 1;
    int best_count = -1;
    for (const auto& [m, c] : hist) {
      if (c >= best_count) {
        mult = m;
        best_count = c;
      }
    }
    fam.multiplicity = fam.dimension >= 2 ? 1 : std::max(1, mult);
    fam.description = "grid clusters of dimension " + std::to_string(fam.dimension);
    set.family = fam;
    dedup_and_sort(set.solutions, cfg.dedup_m, cfg.dedup_rad);
    if (set.solutions.size() > kMaxRepresentatives) {
      std::vector<Solution> reps;
      for (std::size_t i = 0; i < kMaxRepresentatives; ++i) {
        reps.push_back(set.solutions[i * set.solutions.size() / kMaxRepresentatives]);
      }
      set.solutions = std::move(reps);
    }
  } else {
    for (const auto& cl : out.clusters) {
      set.solutions.insert(set.solutions.end(), cl.refined.begin(), cl.refined.end());
    }
    dedup_and_sort(set.solutions, cfg.dedup_m, cfg.dedup_rad);
    for (const auto& sol : set.solutions) {
      const auto& t = sol.transform;
      const int i = static_cast<int>(std::lround((t.dx - g.origin.x()) / g.cell));
      const int j = static_cast<int>(std::lround((t.dy - g.origin.y()) / g.cell));
      const int l = std::clamp(static_cast<int>(std::floor((t.phi + kPi) / g.phi_step())), 0,
                               g.n_phi - 1);
      const bool inside = i >= 0 && j >= 0 && i < g.nx && j < g.ny;
      if (!inside || !std::binary_search(keys.begin(), keys.end(), key_of(g, l, i, j))) {
        set.warnings.push_back("GridTooCoarse: refined solution outside its candidate cell");
      }
    }
  }
  if (set.solutions.empty()) {
    set.warnings.push_back("NoSolutionFound: no cluster refined below the acceptance tolerance");
  }
  set.ind = count_indistinguishable(set);
  return out;
}

SolutionSet brute_force_oracle(const Scenario& s, const SolverConfig& cfg) {
  return run_oracle(s, cfg).solutions;
}

Agreement compare_solution_sets(const SolutionSet& a, const SolutionSet& b, double tol_m,
                                double tol_rad) {
  Agreement ag;
  if (a.ind != b.ind) {
    ag.detail = "Ind classes differ: " + (a.ind ? a.ind->str() : "none") + " vs " +
                (b.ind ? b.ind->str() : "none");
    return ag;
  }
  if (!a.ind || !a.ind->is_finite()) {
    ag.agree = true;
    ag.detail = "same class " + (a.ind ? a.ind->str() : std::string("none"));
    return ag;
  }
  auto covered = [&](const SolutionSet& x, const SolutionSet& y) {
    return std::all_of(x.solutions.begin(), x.solutions.end(), [&](const Solution& p) {
      return std::any_of(y.solutions.begin(), y.solutions.end(), [&](const Solution& q) {
        return same_transform(p.transform, q.transform, tol_m, tol_rad);
      });
    });
  };
  ag.agree = covered(a, b) && covered(b, a);
  ag.detail = ag.agree ? "all " + std::to_string(a.size()) + " solutions match"
                       : "solution transforms differ beyond tolerance";
  return ag;
}

}  // namespace constructa
