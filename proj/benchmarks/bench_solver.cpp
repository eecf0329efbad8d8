#include <benchmark/benchmark.h>

#include "ctmg/model.hpp"
#include "ctmg/nets.hpp"
#include "ctmg/oracle.hpp"

namespace {

void bench_step_level(benchmark::State& state) {
  ctmg::MarkovGame game = ctmg::build_running_example();
  std::vector<double> anchor{0.075, 0.107, 0.244, 1.0, 0.0};
  anchor.resize(game.locations.size());
  int level = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto res = ctmg::step_level(game, level, anchor, 0.1);
    benchmark::DoNotOptimize(res.values);
  }
}
BENCHMARK(bench_step_level)->Arg(2)->Arg(3)->Arg(4);

void bench_solve_running(benchmark::State& state) {
  ctmg::MarkovGame game = ctmg::build_running_example();
  ctmg::SolverConfig cfg;
  cfg.level = static_cast<int>(state.range(0));
  cfg.horizon = 4.0;
  cfg.precision = 1e-6;
  cfg.record_value_function = false;
  for (auto _ : state) {
    auto res = ctmg::solve(game, cfg);
    benchmark::DoNotOptimize(res.values0);
  }
}
BENCHMARK(bench_solve_running)->Arg(2)->Arg(3);

void bench_solve_erlang(benchmark::State& state) {
  ctmg::NormaliseResult nr = ctmg::normalise(ctmg::build_erlang(), 7.0);
  ctmg::SolverConfig cfg;
  cfg.level = 3;
  cfg.horizon = nr.horizon;
  cfg.precision = 1e-4;
  cfg.record_value_function = false;
  for (auto _ : state) {
    auto res = ctmg::solve(nr.game, cfg);
    benchmark::DoNotOptimize(res.values0);
  }
}
BENCHMARK(bench_solve_erlang);

void bench_fine_single_net(benchmark::State& state) {
  ctmg::MarkovGame game = ctmg::build_running_example();
  for (auto _ : state) {
    auto v = ctmg::fine_single_net(game, 4.0, 1e-4);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(bench_fine_single_net);

}  // namespace

BENCHMARK_MAIN();
