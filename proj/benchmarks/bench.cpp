#include <benchmark/benchmark.h>

#include "weakgrid/controller.hpp"
#include "weakgrid/plant.hpp"
#include "weakgrid/scenario.hpp"

using namespace weakgrid;

static void BM_abc_to_dq(benchmark::State& state) {
  ThreePhaseSample x{1.0, -0.4, -0.6};
  double th = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(abc_to_dq(x, Angle(th)));
    th += 1e-3;
  }
}
BENCHMARK(BM_abc_to_dq);

static void BM_plant_step(benchmark::State& state) {
  const NetworkParams p;
  const PerUnitBase base;
  PlantState x;
  x.v_pcc = {1.0, -0.5, -0.5};
  PlantInputs in;
  in.u_vsc = {1.2, -0.6, -0.6};
  in.fault_active = state.range(0) != 0;
  double t = 0.0;
  for (auto _ : state) {
    x = step(x, t, 1e-6, in, p, base).state;
    t += 1e-6;
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_plant_step)->Arg(0)->Arg(1);

static void BM_controller_tick(benchmark::State& state) {
  const ControlParams c;
  ControllerState s;
  for (auto _ : state) {
    const TickOutput out =
        controller_tick({1.0, -0.5, -0.5}, {0.6, -0.3, -0.3}, Angle(0.1), s, c);
    s = out.state;
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_controller_tick);

// One full 2.5 s scenario.
static void BM_run_case_a(benchmark::State& state) {
  Scenario s = presets::case_a();
  s.sync_mode = state.range(0) != 0 ? SyncMode::PccSync : SyncMode::StrongGridSync;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(s));
  }
}
BENCHMARK(BM_run_case_a)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
