#include "constructa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "constructa/error.hpp"

namespace constructa {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParseError, "field '" + field + "': " + what);
}

[[noreturn]] void schema_fail(const std::string& what) {
  throw Error(ErrorCode::kSchemaError, what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) schema_fail("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "." + key, "missing");
  return *it;
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  return j;
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array");
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(path, "must be finite");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<int>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
  require_array(j, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

}  // namespace

const Anchor& Scenario::anchor(AnchorId id) const {
  for (const auto& a : anchors) {
    if (a.id == id) return a;
  }
  schema_fail("unknown anchor id " + std::to_string(id));
}

const std::vector<double>& Scenario::ranges() const {
  if (!rho) throw Error(ErrorCode::kMissingMeasurements, "scenario has no ranges");
  return *rho;
}

bool Scenario::operator==(const Scenario& o) const {
  return anchors == o.anchors && trajectory == o.trajectory && schedule == o.schedule &&
         rho == o.rho && tolerances == o.tolerances && controls == o.controls &&
         sample_times == o.sample_times && truth == o.truth && synthesis == o.synthesis;
}

const char* to_string(AnchorSetClass c) {
  switch (c) {
    case AnchorSetClass::kC1: return "C1";
    case AnchorSetClass::kC2: return "C2";
    case AnchorSetClass::kC3: return "C3";
  }
  return "?";
}

std::vector<AnchorGroup> group_by_anchor(const Scenario& s) {
  std::vector<AnchorGroup> groups;
  for (std::size_t k = 0; k < s.schedule.size(); ++k) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const AnchorGroup& g) { return g.id == s.schedule[k]; });
    if (it == groups.end()) {
      groups.push_back({s.schedule[k], {}});
      it = std::prev(groups.end());
    }
    it->indices.push_back(k);
  }
  return groups;
}

std::vector<Point2> points_of(const Scenario& s, const AnchorGroup& g) {
  std::vector<Point2> pts;
  pts.reserve(g.indices.size());
  for (std::size_t k : g.indices) pts.push_back(s.point(k));
  return pts;
}

void validate(const Scenario& s) {
  const auto& t = s.tolerances;
  for (double v : {t.collinear, t.tangency, t.rank, t.dedup, t.degenerate}) {
    if (!(v > 0.0) || !std::isfinite(v)) schema_fail("tolerances must be positive and finite");
  }
  if (s.anchors.empty()) schema_fail("at least one anchor is required");
  std::set<AnchorId> ids;
  for (std::size_t i = 0; i < s.anchors.size(); ++i) {
    const auto& a = s.anchors[i];
    if (!ids.insert(a.id).second) schema_fail("duplicate anchor id " + std::to_string(a.id));
    if (!a.position.allFinite()) schema_fail("anchor " + std::to_string(a.id) + " is not finite");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      schema_fail("anchor " + std::to_string(a.id) + " weight must be positive");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((s.anchors[j].position - a.position).norm() <= t.collinear) {
        schema_fail("anchors " + std::to_string(s.anchors[j].id) + " and " +
                    std::to_string(a.id) + " coincide");
      }
    }
  }
  const std::size_t n = s.size();
  if (n == 0) schema_fail("at least one measurement point is required");
  for (const auto& p : s.trajectory.points) {
    if (!p.allFinite()) schema_fail("measurement points must be finite");
  }
  if (s.trajectory.headings && s.trajectory.headings->size() != n) {
    schema_fail("headings_v length " + std::to_string(s.trajectory.headings->size()) +
                " differs from the number of points " + std::to_string(n));
  }
  if (s.schedule.size() != n) {
    schema_fail("schedule length " + std::to_string(s.schedule.size()) +
                " differs from the number of points " + std::to_string(n));
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!ids.count(s.schedule[k])) {
      schema_fail("schedule[" + std::to_string(k) + "] names unknown anchor " +
                  std::to_string(s.schedule[k]));
    }
  }
  if (s.rho) {
    if (s.rho->size() != n) {
      schema_fail("rho length " + std::to_string(s.rho->size()) +
                  " differs from the number of points " + std::to_string(n));
    }
    for (double r : *s.rho) {
      if (!std::isfinite(r) || r < 0.0) schema_fail("ranges must be finite and non-negative");
    }
  }
  if (s.controls) {
    validate_controls(*s.controls);
    if (!s.sample_times) schema_fail("controls require sample_times");
    if (s.sample_times->size() != n) schema_fail("sample_times length differs from points");
    std::vector<UnicycleState> states;
    try {
      states = integrate(*s.controls, *s.sample_times);
    } catch (const Error& e) {
      schema_fail(std::string("sample_times: ") + e.what());
    }
    for (std::size_t k = 0; k < n; ++k) {
      if ((states[k].position() - s.point(k)).norm() > 1e-9) {
        schema_fail("points_v[" + std::to_string(k) + "] does not match the controls");
      }
    }
  }
  if (s.truth && !s.truth->as_vector().allFinite()) schema_fail("truth must be finite");
  if (s.synthesis && !(s.synthesis->noise_std >= 0.0)) schema_fail("noise_std must be >= 0");
}

Scenario scenario_from_json(const json& j) {
  require_object(j, "$");
  check_keys(j, "scenario",
             {"anchors", "points_v", "headings_v", "schedule", "rho", "tolerances", "controls",
              "sample_times", "truth", "synthesis"});
  Scenario s;

  const json& anchors = require_array(require(j, "anchors", "$"), "anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string path = "anchors[" + std::to_string(i) + "]";
    const json& a = require_object(anchors[i], path);
    check_keys(a, path, {"id", "x", "y", "weight"});
    Anchor anchor;
    anchor.id = integer(require(a, "id", path), path + ".id");
    anchor.position = {number(require(a, "x", path), path + ".x"),
                       number(require(a, "y", path), path + ".y")};
    if (a.contains("weight")) anchor.weight = number(a["weight"], path + ".weight");
    s.anchors.push_back(anchor);
  }

  if (j.contains("controls")) {
    const json& c = require_array(j["controls"], "controls");
    UnicycleControls controls;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string path = "controls[" + std::to_string(i) + "]";
      const json& seg = require_object(c[i], path);
      check_keys(seg, path, {"v", "omega", "duration"});
      controls.segments.push_back({number(require(seg, "v", path), path + ".v"),
                                   number(require(seg, "omega", path), path + ".omega"),
                                   number(require(seg, "duration", path), path + ".duration")});
    }
    s.controls = std::move(controls);
    s.sample_times = number_list(require(j, "sample_times", "$"), "sample_times");
  } else if (j.contains("sample_times")) {
    schema_fail("sample_times given without controls");
  }

  if (j.contains("points_v")) {
    const json& pts = require_array(j["points_v"], "points_v");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string path = "points_v[" + std::to_string(i) + "]";
      const json& p = require_object(pts[i], path);
      check_keys(p, path, {"x", "y"});
      s.trajectory.points.emplace_back(number(require(p, "x", path), path + ".x"),
                                       number(require(p, "y", path), path + ".y"));
    }
    if (j.contains("headings_v")) s.trajectory.headings = number_list(j["headings_v"], "headings_v");
  } else if (s.controls) {
    validate_controls(*s.controls);
    try {
      s.trajectory = controls_to_trajectory_v(*s.controls, *s.sample_times);
    } catch (const Error& e) {
      schema_fail(std::string("sample_times: ") + e.what());
    }
    if (j.contains("headings_v")) s.trajectory.headings = number_list(j["headings_v"], "headings_v");
  } else {
    parse_fail("$.points_v", "missing (and no controls to generate it)");
  }

  const json& sched = require_array(require(j, "schedule", "$"), "schedule");
  for (std::size_t k = 0; k < sched.size(); ++k) {
    s.schedule.push_back(integer(sched[k], "schedule[" + std::to_string(k) + "]"));
  }
  if (j.contains("rho")) s.rho = number_list(j["rho"], "rho");

  if (j.contains("tolerances")) {
    const json& t = require_object(j["tolerances"], "tolerances");
    check_keys(t, "tolerances", {"collinear", "tangency", "rank", "dedup", "degenerate"});
    auto opt = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = number(t[key], std::string("tolerances.") + key);
    };
    opt("collinear", s.tolerances.collinear);
    opt("tangency", s.tolerances.tangency);
    opt("rank", s.tolerances.rank);
    opt("dedup", s.tolerances.dedup);
    opt("degenerate", s.tolerances.degenerate);
  }

  if (j.contains("truth")) {
    const json& t = require_object(j["truth"], "truth");
    check_keys(t, "truth", {"dx", "dy", "phi"});
    s.truth = RigidTransform2(number(require(t, "dx", "truth"), "truth.dx"),
                              number(require(t, "dy", "truth"), "truth.dy"),
                              number(require(t, "phi", "truth"), "truth.phi"));
  }
  if (j.contains("synthesis")) {
    const json& t = require_object(j["synthesis"], "synthesis");
    check_keys(t, "synthesis", {"noise_std", "seed"});
    SynthesisInfo info;
    info.noise_std = number(require(t, "noise_std", "synthesis"), "synthesis.noise_std");
    const json& seed = require(t, "seed", "synthesis");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      parse_fail("synthesis.seed", "expected a non-negative integer");
    }
    info.seed = seed.get<std::uint64_t>();
    s.synthesis = info;
  }

  validate(s);
  return s;
}

Scenario scenario_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << line_of(text, e.byte) << ": " << e.what();
    throw Error(ErrorCode::kParseError, msg.str());
  }
  return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["anchors"] = json::array();
  for (const auto& a : s.anchors) {
    json ja = {{"id", a.id}, {"x", a.position.x()}, {"y", a.position.y()}};
    if (a.weight != 1.0) ja["weight"] = a.weight;
    j["anchors"].push_back(ja);
  }
  j["points_v"] = json::array();
  for (const auto& p : s.trajectory.points) j["points_v"].push_back({{"x", p.x()}, {"y", p.y()}});
  if (s.trajectory.headings) j["headings_v"] = *s.trajectory.headings;
  j["schedule"] = s.schedule;
  if (s.rho) j["rho"] = *s.rho;
  const auto& t = s.tolerances;
  j["tolerances"] = {{"collinear", t.collinear},
                     {"tangency", t.tangency},
                     {"rank", t.rank},
                     {"dedup", t.dedup},
                     {"degenerate", t.degenerate}};
  if (s.controls) {
    j["controls"] = json::array();
    for (const auto& seg : s.controls->segments) {
      j["controls"].push_back({{"v", seg.v}, {"omega", seg.omega}, {"duration", seg.duration}});
    }
    j["sample_times"] = s.sample_times.value_or(std::vector<double>{});
  }
  if (s.truth) j["truth"] = {{"dx", s.truth->dx}, {"dy", s.truth->dy}, {"phi", s.truth->phi}};
  if (s.synthesis) {
    j["synthesis"] = {{"noise_std", s.synthesis->noise_std}, {"seed", s.synthesis->seed}};
  }
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return scenario_from_string(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParseError, "cannot write " + path.string());
  out << scenario_to_json(s).dump(2) << '\n';
}

std::vector<double> synthesize_measurements(const Scenario& s, const RigidTransform2& truth,
                                            double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::kNonPositiveInput, "noise_std must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  std::vector<double> rho;
  rho.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    double r = (apply_transform(truth, s.point(k)) - s.anchor_at(k).position).norm();
    if (noise_std > 0.0) r = std::max(0.0, r + noise(rng));
    rho.push_back(r);
  }
  return rho;
}

AnchorSetClass classify_anchor_set(std::span<const Point2> points, const Point2& anchor,
                                   double tol) {
  bool coincident = true;
  for (const auto& p : points) {
    if ((p - anchor).norm() <= tol) return AnchorSetClass::kC3;
    if ((p - points.front()).norm() > tol) coincident = false;
  }
  if (coincident) return AnchorSetClass::kC1;
  return collinear(points, tol) ? AnchorSetClass::kC2 : AnchorSetClass::kC3;
}

Scenario prefix(const Scenario& s, std::size_t n) {
  n = std::min(n, s.size());
  Scenario out = s;
  out.trajectory.points.resize(n);
  if (out.trajectory.headings) out.trajectory.headings->resize(n);
  out.schedule.resize(n);
  if (out.rho) out.rho->resize(n);
  if (out.sample_times) out.sample_times->resize(n);
  return out;
}

}  // namespace constructa
