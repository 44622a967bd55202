#include <benchmark/benchmark.h>

#include "fraclab/bifurcation.hpp"
#include "fraclab/corpus.hpp"
#include "fraclab/dynamics.hpp"
#include "fraclab/kernel.hpp"
#include "fraclab/nn/network.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

static void BM_BuildKernel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(0.37, state.range(0)));
}
BENCHMARK(BM_BuildKernel)->Arg(50)->Arg(200)->Arg(2000);

static void BM_GenerateDelayed(benchmark::State& state) {
  const auto kernel = build_kernel(0.6, state.range(0));
  const MapSpec spec{MapKind::Delayed, 1.3, 0.6, 0.42, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(generate(spec, state.range(0), kernel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateDelayed)->Arg(50)->Arg(200);

static void BM_Sweep(benchmark::State& state) {
  SweepOptions o;
  o.kind = MapKind::Delayed;
  o.nu = 0.2;
  o.mu_step = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(sweep(o));
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);

static void BM_DeskCorpus(benchmark::State& state) {
  const auto grid = preset_grid("desk");
  for (auto _ : state) {
    std::size_t n = 0;
    build_corpus(grid, 42, [&](const TrajectoryRecord&) { ++n; }, kDefaultPadLength,
                 static_cast<unsigned>(state.range(0)));
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_DeskCorpus)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

namespace {

nn::NetworkConfig bench_net(bool full) {
  nn::NetworkConfig c;
  if (!full) {
    c.conv1_filters = 8;
    c.conv2_filters = 16;
    c.lstm_layers = 1;
    c.lstm_units = 16;
  }
  return c;
}

std::vector<nn::Example> bench_batch(std::size_t n) {
  SplitMix64 rng(3);
  std::vector<nn::Example> b(n);
  for (auto& e : b) {
    for (int t = 0; t < 50; ++t) e.input.push_back(rng.uniform());
    e.target = {1.0};
  }
  return b;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const auto c = bench_net(state.range(0) != 0);
  const auto p = nn::init_parameters(c, 1);
  const auto b = bench_batch(1);
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward(p, c, b[0].input));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_LossAndGradients(benchmark::State& state) {
  const auto c = bench_net(state.range(0) != 0);
  const auto p = nn::init_parameters(c, 1);
  const auto b = bench_batch(32);
  for (auto _ : state)
    benchmark::DoNotOptimize(nn::loss_and_gradients(p, c, b, nn::Loss::MAE, {true, 5}));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_LossAndGradients)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
