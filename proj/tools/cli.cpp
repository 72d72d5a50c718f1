#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "constructa/critical_lines.hpp"
#include "constructa/error.hpp"
#include "constructa/global_analysis.hpp"
#include "constructa/local_analysis.hpp"
#include "constructa/oracle.hpp"
#include "constructa/scenario.hpp"
#include "constructa/solver.hpp"

namespace constructa::cli {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

struct GlobalOptions {
  std::optional<double> tol_accept;
  std::optional<double> tol_rank;
  std::uint64_t seed = 0;
  std::optional<double> grid_extent;
  std::optional<double> grid_cell;
  int phi_cells = 360;
  unsigned threads = 0;
  std::string out;
};

SolverConfig make_config(const Scenario& s, const GlobalOptions& g) {
  SolverConfig cfg = SolverConfig::for_scenario(s);
  if (g.tol_accept) cfg.accept_tol = *g.tol_accept;
  if (g.tol_rank) cfg.rank_tol = *g.tol_rank;
  cfg.seed = g.seed;
  if (g.grid_extent) cfg.grid.half_extent = *g.grid_extent;
  if (g.grid_cell) cfg.grid.cell = *g.grid_cell;
  cfg.grid.phi_cells = g.phi_cells;
  cfg.threads = g.threads;
  return cfg;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json transform_json(const RigidTransform2& t) { return {{"dx", t.dx}, {"dy", t.dy}, {"phi", t.phi}}; }

json vec_json(const Vector3& v) { return json::array({v(0), v(1), v(2)}); }

json ind_json(const std::optional<IndClass>& ind) {
  if (!ind) return nullptr;
  json j = {{"label", ind->str()}, {"kind", ind->is_finite() ? "finite" : "family"}};
  if (ind->is_finite()) {
    j["count"] = ind->count;
  } else {
    j["dimension"] = ind->dimension;
    j["multiplicity"] = ind->multiplicity;
  }
  return j;
}

json solution_set_json(const SolutionSet& ss) {
  json j;
  j["ind"] = ind_json(ss.ind);
  j["solutions"] = json::array();
  for (const auto& sol : ss.solutions) {
    json e = transform_json(sol.transform);
    e["residual_norm"] = sol.residual_norm;
    e["jacobian_rank"] = sol.jacobian_rank;
    j["solutions"].push_back(e);
  }
  if (ss.family) {
    j["family"] = {{"dimension", ss.family->dimension},
                   {"multiplicity", ss.family->multiplicity},
                   {"description", ss.family->description}};
  } else {
    j["family"] = nullptr;
  }
  j["warnings"] = ss.warnings;
  return j;
}

json gramian_json(const GramianReport& r) {
  json m = json::array();
  for (int i = 0; i < 3; ++i) m.push_back(vec_json(r.gramian.matrix().row(i).transpose()));
  json nb = json::array();
  for (const auto& v : r.null_basis) nb.push_back(vec_json(v));
  return {{"matrix", m},         {"eigenvalues", vec_json(r.eigenvalues)},
          {"rank", r.rank},      {"min_eig", r.min_eig},
          {"null_basis", nb},    {"verdict", to_string(r.verdict)}};
}

json flags_json(const DegenerateFlags& f) {
  return {{"case1_straight", f.case1_straight},
          {"case2_tangent_locus", f.case2_tangent_locus},
          {"case3_tangent_circles", f.case3_tangent_circles},
          {"case4_tangent_3p1", f.case4_tangent_3p1},
          {"pathological_rotation", f.pathological_rotation},
          {"pathological_translation", f.pathological_translation}};
}

json line_json(const CriticalLine& l, int anchor) {
  json j = {{"provenance", to_string(l.provenance)},
            {"first", l.first},
            {"second", l.second},
            {"point", {l.line.point.x(), l.line.point.y()}},
            {"direction", {l.line.direction.x(), l.line.direction.y()}}};
  if (anchor >= 0) j["anchor"] = anchor;
  return j;
}

struct TaggedLine {
  CriticalLine line;
  int anchor = -1;
};

bool is_2p1_prefix(const Scenario& s) {
  const auto groups = group_by_anchor(s);
  if (s.size() != 3 || groups.size() != 2) return false;
  return informative_distribution(s) == std::vector<int>{2, 1};
}

bool is_1p1p1(const Scenario& s) {
  return s.size() == 3 && group_by_anchor(s).size() == 3;
}

// Critical lines that apply to the scenario as a prefix: the six 2+2 lines
// for a 2+1 prefix, the determinant line for a 1+1+1 prefix at each solution,
// and virtual-anchor axes for any finite ambiguous solution set.
std::vector<TaggedLine> prefix_lines(const Scenario& s, const SolverConfig& cfg,
                                     const SolutionSet& sols, std::vector<std::string>& warnings) {
  std::vector<TaggedLine> out;
  if (is_2p1_prefix(s)) {
    try {
      for (const auto& l : critical_lines_2p2(s, cfg)) out.push_back({l, s.schedule.back()});
    } catch (const Error& e) {
      warnings.push_back(e.what());
    }
  }
  if (is_1p1p1(s)) {
    for (std::size_t i = 0; i < sols.solutions.size(); ++i) {
      const auto& t = sols.solutions[i].transform;
      try {
        const Line2 l = critical_line_1p1p1_local(
            s.anchor_at(0).position, s.anchor_at(1).position, s.anchor_at(2).position,
            apply_transform(t, s.point(0)), apply_transform(t, s.point(1)));
        out.push_back({{l, LineProvenance::kDetWLine, static_cast<int>(i), -1}, s.schedule[2]});
      } catch (const Error& e) {
        warnings.push_back(e.what());
      }
    }
  }
  if (sols.ind && sols.ind->is_finite() && sols.size() >= 2) {
    for (const auto& a : s.anchors) {
      try {
        for (const auto& l : critical_lines_next_point(sols, a.position)) out.push_back({l, a.id});
      } catch (const Error& e) {
        warnings.push_back(e.what());
      }
    }
  }
  return out;
}

class Output {
 public:
  Output(std::ostream& out, const std::string& path) : out_(out), path_(path) {}

  void write(const std::string& text) {
    if (path_.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(path_);
    if (!f) throw Error(ErrorCode::kParseError, "cannot write '" + path_ + "'");
    f << text;
  }

 private:
  std::ostream& out_;
  std::string path_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json report_header(const Scenario& s, const SolverConfig& cfg) {
  const json sj = scenario_to_json(s);
  return {{"schema_version", kSchemaVersion},
          {"scenario_hash", hex(fnv1a(sj.dump()))},
          {"scenario", sj},
          {"seed", cfg.seed},
          {"tolerances",
           {{"accept", cfg.accept_tol},
            {"rank", cfg.rank_tol},
            {"dedup_m", cfg.dedup_m},
            {"dedup_rad", cfg.dedup_rad}}}};
}

int cmd_analyze(const std::string& path, const GlobalOptions& g, std::ostream& out) {
  const Scenario s = load_scenario(path);
  const SolverConfig cfg = make_config(s, g);
  const GlobalAnalysis ga = analyze_global(s, cfg);
  json j = report_header(s, cfg);
  j["taxonomy"] = {{"distribution", ga.taxonomy.distribution},
                   {"distribution_label", ga.taxonomy.distribution_str()},
                   {"verdict", to_string(ga.taxonomy.verdict)},
                   {"ind", ind_json(ga.taxonomy.ind)}};
  j["method"] = ga.method;
  j["solutions"] = solution_set_json(ga.solutions);
  j["degenerate"] = flags_json(ga.flags);

  std::vector<std::string> warnings;
  json lines = json::array();
  for (const auto& l : prefix_lines(s, cfg, ga.solutions, warnings)) lines.push_back(line_json(l.line, l.anchor));
  j["critical_lines"] = lines;

  bool all_full_rank = !ga.solutions.empty();
  json grams = json::array();
  for (std::size_t i = 0; i < ga.solutions.size(); ++i) {
    const auto& t = ga.solutions.solutions[i].transform;
    try {
      const GramianReport r = build_gramian(s, t);
      json e = gramian_json(r);
      e["solution"] = i;
      json dirs = json::array();
      for (const auto& d : singular_direction_report(r, s, t)) {
        dirs.push_back({{"kind", to_string(d.kind)}, {"index", d.index}, {"direction", vec_json(d.direction)}});
      }
      e["singular_directions"] = dirs;
      grams.push_back(e);
      all_full_rank = all_full_rank && r.rank == 3;
    } catch (const Error& e) {
      warnings.push_back(e.what());
      all_full_rank = false;
    }
  }
  j["gramians"] = grams;
  j["warnings"] = warnings;
  Output(out, g.out).write(dump(j));
  return ga.taxonomy.ind.unique() && all_full_rank ? kExitOk : kExitAmbiguous;
}

int cmd_localize(const std::string& path, bool oracle, const GlobalOptions& g, std::ostream& out) {
  const Scenario s = load_scenario(path);
  s.ranges();
  if (s.size() == 0) throw Error(ErrorCode::kMissingMeasurements, "scenario has no measurements");
  const SolverConfig cfg = make_config(s, g);
  const SolutionSet ms = solve_multistart(s, cfg);
  json j = report_header(s, cfg);
  j["result"] = solution_set_json(ms);
  if (s.truth) {
    j["truth"] = transform_json(*s.truth);
  }
  if (oracle) {
    const SolutionSet os = brute_force_oracle(s, cfg);
    const Agreement ag = compare_solution_sets(ms, os, cfg.dedup_m, cfg.dedup_rad);
    j["oracle"] = solution_set_json(os);
    j["oracle"]["agree"] = ag.agree;
    j["oracle"]["detail"] = ag.detail;
  }
  Output(out, g.out).write(dump(j));
  return ms.ind && ms.ind->unique() ? kExitOk : kExitAmbiguous;
}

struct GramianOptions {
  std::optional<double> dx, dy, phi;
  std::optional<double> final_x, final_y;
  bool numerical = false;
};

int cmd_gramian(const std::string& path, const GramianOptions& o, const GlobalOptions& g,
                std::ostream& out) {
  const Scenario s = load_scenario(path);
  const SolverConfig cfg = make_config(s, g);
  RigidTransform2 t;
  std::string source = "supplied";
  if (o.dx || o.dy || o.phi) {
    t = RigidTransform2(o.dx.value_or(0.0), o.dy.value_or(0.0), o.phi.value_or(0.0));
  } else {
    const SolutionSet ms = solve_multistart(s, cfg);
    if (ms.empty()) throw Error(ErrorCode::kNoSolutionFound, "no transform fits the ranges");
    t = ms.solutions.front().transform;
    source = "localized";
  }
  std::optional<Point2> pf;
  if (o.final_x || o.final_y) pf = Point2(o.final_x.value_or(0.0), o.final_y.value_or(0.0));
  const GramianReport r = build_gramian(s, t, pf);
  json j = report_header(s, cfg);
  j["transform"] = transform_json(t);
  j["transform_source"] = source;
  j["gramian"] = gramian_json(r);
  json dirs = json::array();
  for (const auto& d : singular_direction_report(r, s, t)) {
    dirs.push_back({{"kind", to_string(d.kind)},
                    {"index", d.index},
                    {"description", d.description},
                    {"direction", vec_json(d.direction)}});
  }
  j["singular_directions"] = dirs;
  if (o.numerical) {
    if (!s.controls) throw Error(ErrorCode::kInconsistentControls, "scenario carries no controls");
    const SymMat3 n = numerical_gramian(*s.controls, s, t);
    const double scale = std::max(r.eigenvalues(2), 1e-300);
    j["numerical"] = gramian_json(analyze_gramian(n, cfg.rank_tol));
    j["numerical"]["max_abs_diff"] = (n.matrix() - r.gramian.matrix()).cwiseAbs().maxCoeff();
    j["numerical"]["max_rel_diff"] = (n.matrix() - r.gramian.matrix()).cwiseAbs().maxCoeff() / scale;
  }
  Output(out, g.out).write(dump(j));
  return r.rank == 3 ? kExitOk : kExitAmbiguous;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int cmd_plotdata(const std::string& path, const std::string& what, int samples,
                 const GlobalOptions& g, std::ostream& out) {
  const Scenario s = load_scenario(path);
  const SolverConfig cfg = make_config(s, g);
  std::ostringstream os;
  if (what == "locus") {
    const Locus l = emit_locus_1p1p1(s, samples);
    os << "branch,arc,phi,x,y\n";
    for (const auto& [name, pts] : {std::pair{"a", &l.branch_a}, std::pair{"b", &l.branch_b}}) {
      for (const auto& p : *pts) {
        os << name << ',' << p.arc << ',' << csv_number(p.phi) << ',' << csv_number(p.p2.x()) << ','
           << csv_number(p.p2.y()) << '\n';
      }
    }
  } else if (what == "critical-lines") {
    const SolutionSet sols = is_2p1_prefix(s) ? SolutionSet{} : analyze_global(s, cfg).solutions;
    std::vector<std::string> warnings;
    os << "provenance,first,second,anchor,px,py,dx,dy\n";
    for (const auto& t : prefix_lines(s, cfg, sols, warnings)) {
      const auto& l = t.line;
      os << to_string(l.provenance) << ',' << l.first << ',' << l.second << ',' << t.anchor << ','
         << csv_number(l.line.point.x()) << ',' << csv_number(l.line.point.y()) << ','
         << csv_number(l.line.direction.x()) << ',' << csv_number(l.line.direction.y()) << '\n';
    }
  } else if (what == "solutions") {
    const SolutionSet ms = solve_multistart(s, cfg);
    os << "index,dx,dy,phi,residual_norm,jacobian_rank\n";
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const auto& sol = ms.solutions[i];
      os << i << ',' << csv_number(sol.transform.dx) << ',' << csv_number(sol.transform.dy) << ','
         << csv_number(sol.transform.phi) << ',' << csv_number(sol.residual_norm) << ','
         << sol.jacobian_rank << '\n';
    }
  } else if (what == "cluster-map") {
    const OracleOutcome oo = run_oracle(s, cfg);
    os << "cluster,i,j,l,dx,dy,phi,score\n";
    for (const auto& c : oo.cells) {
      const Point2 xy = oo.grid.xy_at(c.i, c.j);
      os << c.cluster << ',' << c.i << ',' << c.j << ',' << c.l << ',' << csv_number(xy.x()) << ','
         << csv_number(xy.y()) << ',' << csv_number(oo.grid.phi_at(c.l)) << ',' << csv_number(c.score)
         << '\n';
    }
  } else {
    throw Error(ErrorCode::kSchemaError, "unknown plot artifact '" + what + "'");
  }
  Output(out, g.out).write(os.str());
  return kExitOk;
}

struct SimulateOptions {
  std::optional<double> dx, dy, phi;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const std::string& path, const SimulateOptions& o, const GlobalOptions& g,
                 std::ostream& out) {
  Scenario s = load_scenario(path);
  std::optional<RigidTransform2> truth = s.truth;
  if (o.dx || o.dy || o.phi) {
    truth = RigidTransform2(o.dx.value_or(0.0), o.dy.value_or(0.0), o.phi.value_or(0.0));
  }
  if (truth) {
    const std::uint64_t seed = o.seed.value_or(g.seed);
    s.truth = truth;
    s.rho = synthesize_measurements(s, *truth, o.noise, seed);
    s.synthesis = SynthesisInfo{o.noise, seed};
  }
  Output(out, g.out).write(dump(scenario_to_json(s)));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Range-only trajectory constructibility analysis", "constructa"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--tol-accept", g.tol_accept, "Residual norm accepted as a solution (m)");
  app.add_option("--tol-rank", g.tol_rank, "Relative rank tolerance");
  app.add_option("--seed", g.seed, "Seed for start sequences and noise");
  app.add_option("--grid-extent", g.grid_extent, "Oracle grid half extent (m)");
  app.add_option("--grid-cell", g.grid_cell, "Oracle grid cell size (m)");
  app.add_option("--phi-cells", g.phi_cells, "Oracle heading layers")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads (0 = CONSTRUCTA_THREADS or hardware)");
  app.add_option("--out", g.out, "Write the report to a file instead of stdout");

  std::string scenario;
  auto* analyze = app.add_subcommand("analyze", "Taxonomy, closed-form solutions, pathologies and Gramians");
  analyze->add_option("scenario", scenario)->required();

  bool oracle = false;
  auto* localize = app.add_subcommand("localize", "Multistart localization");
  localize->add_option("scenario", scenario)->required();
  localize->add_flag("--oracle", oracle, "Cross-check with the brute-force grid oracle");

  GramianOptions go;
  auto* gramian = app.add_subcommand("gramian", "Constructibility Gramian at a transform");
  gramian->add_option("scenario", scenario)->required();
  gramian->add_option("--dx", go.dx);
  gramian->add_option("--dy", go.dy);
  gramian->add_option("--phi", go.phi);
  gramian->add_option("--final-x", go.final_x, "Override the final point");
  gramian->add_option("--final-y", go.final_y);
  gramian->add_flag("--numerical", go.numerical, "Add the integrated Gramian from the controls");

  std::string what;
  int samples = 720;
  auto* plotdata = app.add_subcommand("plotdata", "CSV geometry for plotting");
  plotdata->add_option("scenario", scenario)->required();
  plotdata->add_option("--what", what)
      ->required()
      ->check(CLI::IsMember({"locus", "critical-lines", "solutions", "cluster-map"}));
  plotdata->add_option("--samples", samples, "Locus samples")->check(CLI::PositiveNumber);

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Generate points from controls and synthesize ranges from a truth transform");
  simulate->add_option("scenario", scenario)->required();
  simulate->add_option("--dx", so.dx);
  simulate->add_option("--dy", so.dy);
  simulate->add_option("--phi", so.phi);
  simulate->add_option("--noise", so.noise, "Range noise standard deviation (m)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--noise-seed", so.seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*analyze) return cmd_analyze(scenario, g, out);
    if (*localize) return cmd_localize(scenario, oracle, g, out);
    if (*gramian) return cmd_gramian(scenario, go, g, out);
    if (*plotdata) return cmd_plotdata(scenario, what, samples, g, out);
    if (*simulate) return cmd_simulate(scenario, so, g, out);
  } catch (const std::exception& e) {
    err << "constructa: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace constructa::cli
