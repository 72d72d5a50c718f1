#include <benchmark/benchmark.h>

#include <vector>

#include "constructa/critical_lines.hpp"
#include "constructa/global_analysis.hpp"
#include "constructa/local_analysis.hpp"
#include "constructa/oracle.hpp"

using namespace constructa;

namespace {

Scenario make(const std::vector<Point2>& anchors, const std::vector<Point2>& points,
              const std::vector<AnchorId>& schedule) {
  Scenario s;
  for (std::size_t i = 0; i < anchors.size(); ++i) s.anchors.push_back({static_cast<AnchorId>(i + 1), anchors[i]});
  s.trajectory.points = points;
  s.schedule = schedule;
  s.truth = RigidTransform2(1.0, 2.0, 0.7);
  s.rho = synthesize_measurements(s, *s.truth, 0.0);
  return s;
}

const std::vector<Point2> kAnchors{{0, 0}, {6, 1}, {2, 7}, {-4, 3}};
const std::vector<Point2> kPoints{{1, 0}, {2, 1}, {0, 2}, {3, 3}, {4, 0}};

Scenario scenario_2p2() { return make({kAnchors[0], kAnchors[1]}, {kPoints[0], kPoints[1], kPoints[3], kPoints[4]}, {1, 1, 2, 2}); }
Scenario scenario_2p1() { return make({kAnchors[0], kAnchors[1]}, {kPoints[0], kPoints[1], kPoints[3]}, {1, 1, 2}); }
Scenario scenario_1p1p1() { return make({kAnchors[0], kAnchors[1], kAnchors[2]}, {kPoints[0], kPoints[1], kPoints[3]}, {1, 2, 3}); }
Scenario scenario_single() { return make({kAnchors[0]}, {kPoints[0], kPoints[1], kPoints[2]}, {1, 1, 1}); }

void BM_Multistart2p2(benchmark::State& state) {
  const Scenario s = scenario_2p2();
  SolverConfig cfg = SolverConfig::for_scenario(s);
  cfg.n_starts = static_cast<int>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(solve_multistart(s, cfg));
}
BENCHMARK(BM_Multistart2p2)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
  const Scenario s = state.range(0) == 0 ? scenario_2p2() : scenario_single();
  SolverConfig cfg = SolverConfig::for_scenario(s);
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_oracle(s, cfg));
}
BENCHMARK(BM_Oracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Sweep1p1p1(benchmark::State& state) {
  const Scenario s = scenario_1p1p1();
  const SolverConfig cfg = SolverConfig::for_scenario(s);
  for (auto _ : state) benchmark::DoNotOptimize(solve_1p1p1(s, cfg));
}
BENCHMARK(BM_Sweep1p1p1)->Unit(benchmark::kMillisecond);

void BM_ClosedForm2p1(benchmark::State& state) {
  const Scenario s = scenario_2p1();
  const SolverConfig cfg = SolverConfig::for_scenario(s);
  for (auto _ : state) benchmark::DoNotOptimize(solve_2p1(s, cfg));
}
BENCHMARK(BM_ClosedForm2p1)->Unit(benchmark::kMicrosecond);

void BM_CriticalLines2p2(benchmark::State& state) {
  const Scenario s = scenario_2p1();
  const SolverConfig cfg = SolverConfig::for_scenario(s);
  for (auto _ : state) benchmark::DoNotOptimize(critical_lines_2p2(s, cfg));
}
BENCHMARK(BM_CriticalLines2p2)->Unit(benchmark::kMicrosecond);

void BM_BuildGramian(benchmark::State& state) {
  std::vector<Point2> pts;
  std::vector<AnchorId> sched;
  for (int k = 0; k < state.range(0); ++k) {
    pts.emplace_back(0.1 * k, std::sin(0.3 * k));
    sched.push_back(1 + k % 3);
  }
  const Scenario s = make({kAnchors[0], kAnchors[1], kAnchors[2]}, pts, sched);
  for (auto _ : state) benchmark::DoNotOptimize(build_gramian(s, *s.truth));
}
BENCHMARK(BM_BuildGramian)->Arg(8)->Arg(64)->Arg(512);

void BM_NumericalGramian(benchmark::State& state) {
  UnicycleControls c;
  c.segments = {{1.0, 0.2, 5.0}, {1.5, -0.3, 4.0}};
  std::vector<double> times;
  std::vector<AnchorId> sched;
  const int n = static_cast<int>(state.range(0));
  for (int k = 0; k < n; ++k) {
    times.push_back(9.0 * (k + 0.5) / n);
    sched.push_back(1 + k % 3);
  }
  Scenario s = make({kAnchors[0], kAnchors[1], kAnchors[2]}, controls_to_trajectory_v(c, times).points, sched);
  s.controls = c;
  s.sample_times = times;
  for (auto _ : state) benchmark::DoNotOptimize(numerical_gramian(c, s, *s.truth));
}
BENCHMARK(BM_NumericalGramian)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
