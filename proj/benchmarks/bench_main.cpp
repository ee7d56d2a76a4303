#include <benchmark/benchmark.h>

#include "hwfl/federation.hpp"

namespace {

using namespace hwfl;

void BM_LocalTrain(benchmark::State& state) {
  DataSpec spec;
  spec.samples_per_client = static_cast<std::size_t>(state.range(0));
  const auto data = synthesize_noniid(spec, 1);
  const auto start = init_model({spec.input_dim, static_cast<std::size_t>(state.range(1)),
                                 spec.n_classes}, 2);
  TrainSpec train{1, 0.1, 32, 0.0, 3};
  for (auto _ : state) benchmark::DoNotOptimize(local_train(start, data.clients[0], train));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.clients[0].size()));
}
BENCHMARK(BM_LocalTrain)->Args({200, 0})->Args({2000, 0})->Args({2000, 32});

void BM_BruteForceSchedule(benchmark::State& state) {
  Fleet fleet;
  for (int i = 0; i < state.range(0); ++i) {
    const int cpu = 1 + (i * 7) % 16;
    fleet.push_back({i, "", cpu, 4.0 + i, 8.0 / cpu, 50.0 + 13.0 * i});
  }
  const ScheduleSearch search{1, fleet.size(), {1, 2, 4}, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_schedule(fleet, search));
}
BENCHMARK(BM_BruteForceSchedule)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_RunRound(benchmark::State& state) {
  ExperimentConfig config;
  config.method = static_cast<Method>(state.range(0));
  config.fleet = reference_fleet();
  auto fed = make_state(config, 1);
  int round = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_round(fed, config, ++round));
}
BENCHMARK(BM_RunRound)
    ->Arg(static_cast<int>(Method::kHwfl))
    ->Arg(static_cast<int>(Method::kFedAvg))
    ->Unit(benchmark::kMicrosecond);

void BM_StudentTCdf(benchmark::State& state) {
  double t = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(student_t_cdf(t, 7.3));
    t = t > 4.0 ? -4.0 : t + 0.01;
  }
}
BENCHMARK(BM_StudentTCdf);

}  // namespace

BENCHMARK_MAIN();
