#include <benchmark/benchmark.h>

#include "roomswarm/batch.hpp"

using namespace roomswarm;

namespace {

BatchContext default_context() {
  RoomConfig room;
  Rng rng(1);
  return BatchContext{{}, Environment(room, place_beacons(room, 8, rng)), SimConfig{}};
}

std::vector<SimulationJob> jobs(std::size_t n) {
  const PriorSpec prior;
  std::vector<SimulationJob> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(5, SeedStream::table_row, i));
    out[i] = {sample_prior(prior, rng), derive_seed(5, SeedStream::table_row, i)};
  }
  return out;
}

void BM_BatchSerial(benchmark::State& state) {
  const BatchContext ctx = default_context();
  const auto js = jobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(summarize_batch_serial(ctx, js));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  const BatchContext ctx = default_context();
  const auto js = jobs(static_cast<std::size_t>(state.range(0)));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(summarize_batch_parallel(ctx, js, workers));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SingleRollout(benchmark::State& state) {
  const BatchContext ctx = default_context();
  const auto js = jobs(1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_summary(ctx, js[0]));
}

}  // namespace

BENCHMARK(BM_SingleRollout)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchSerial)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchParallel)->Args({32, 1})->Args({32, 2})->Args({32, 4})->Args({32, 8})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
