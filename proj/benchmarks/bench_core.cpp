#include <benchmark/benchmark.h>

#include <vector>

#include "csflock/analysis.hpp"
#include "csflock/clustering.hpp"
#include "csflock/integrator.hpp"
#include "csflock/model.hpp"
#include "csflock/random.hpp"

using namespace csflock;

static void BM_FirstOrderField(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RandomInstance inst = random_instance(n, 1);
  const ModelParams p(n, 1.0, Potential(2.0));
  const std::vector<int> w(n, 1);
  std::vector<double> out(n);
  for (auto _ : state) {
    rhs_first_order(p, inst.positions, inst.velocities, w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FirstOrderField)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

static void BM_IntegrateShortRange(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RandomInstance inst = random_instance(n, 2);
  const ModelParams p(n, 0.4, Potential(2.0));
  for (auto _ : state) {
    auto tr = integrate_first_order(p, FirstOrderState::from_particles(inst.positions, inst.velocities), {}, 50.0);
    benchmark::DoNotOptimize(tr.samples.size());
  }
}
BENCHMARK(BM_IntegrateShortRange)->Arg(4)->Arg(10)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_IntegrateLongRangeWithEvents(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RandomInstance inst = random_instance(n, 3);
  const ModelParams p(n, 1.0, Potential(0.5));
  for (auto _ : state) {
    auto tr = integrate_first_order(p, FirstOrderState::from_particles(inst.positions, inst.velocities), {}, 20.0);
    benchmark::DoNotOptimize(tr.events.size());
  }
}
BENCHMARK(BM_IntegrateLongRangeWithEvents)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_PredictFirstOrder(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RandomInstance inst = random_instance(n, 4);
  const Potential pot(2.0);
  for (auto _ : state) {
    auto part = predict_first_order(inst.velocities, 0.4, pot);
    benchmark::DoNotOptimize(part.count);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PredictFirstOrder)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

static void BM_SweepThreads(benchmark::State& state) {
  const RandomInstance inst = random_instance(64, 5);
  std::vector<double> grid;
  for (int k = 1; k <= 2000; ++k) grid.push_back(0.001 * k);
  const SweepInput input{ModelOrder::Second, inst.positions, inst.velocities};
  const Potential pot(2.0);
  for (auto _ : state) {
    auto rows = sweep_cluster_count(input, grid, pot, static_cast<unsigned>(state.range(0)));
    benchmark::DoNotOptimize(rows.data());
  }
}
BENCHMARK(BM_SweepThreads)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Equilibrium(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RandomInstance inst = random_instance(n, 6);
  const Potential pot(0.5);
  for (auto _ : state) {
    auto eq = solve_equilibrium(inst.velocities, 1.0, pot, n);
    benchmark::DoNotOptimize(eq.residual);
  }
}
BENCHMARK(BM_Equilibrium)->Arg(4)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
