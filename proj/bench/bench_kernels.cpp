#include <benchmark/benchmark.h>

#include "spat/pipeline.hpp"
#include "spat/synth_oracle.hpp"

using namespace spat;

namespace {

SimConfig workload() {
  SimConfig s;
  s.plan = switch_plan("A", 90, 50, 120, 65, 9 * 3600);
  s.days = 20;
  s.span_start_s = 5 * 3600;
  s.span_end_s = 13 * 3600;
  s.faults.long_parker_fraction = 0.1;
  return s;
}

const SimResult& sim() {
  static const SimResult r = simulate(workload());
  return r;
}

const std::vector<StartEvent>& events() {
  static const auto e = calibrate(sim().records, oracle_calibration(workload()));
  return e;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void coarse(benchmark::State& state) {
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(coarse_scan(events(), DayClass::weekday, {}, exec));
}

void schedule(benchmark::State& state) {
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(build_schedule(events(), DayClass::weekday, {}, exec));
}

void pipeline(benchmark::State& state) {
  const auto exec = exec_of(state);
  const auto table = oracle_calibration(workload());
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(sim().records, table, DayClass::weekday, {}, exec));
}

}  // namespace

BENCHMARK(coarse)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(schedule)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(pipeline)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
