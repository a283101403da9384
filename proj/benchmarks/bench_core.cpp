#include <random>

#include <benchmark/benchmark.h>

#include "dmm/engine.hpp"
#include "dmm/grace.hpp"
#include "dmm/topology.hpp"
#include "dmm/transform.hpp"

namespace {

using namespace dmm;

Block random_block(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> unit;
  Block b(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) b(r, c) = unit(rng);
  return b;
}

// Args: agents, dimension.
void BM_StepGeneral(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const MixingMatrix m = metropolis_weights(build_graph(GraphKind::kRing, k, 1));
  const StrategySet s = build_strategy(StrategyKind::kED, m);
  std::mt19937_64 rng(1);
  NetworkState st = make_state(random_block(k, d, rng), random_block(k, d, rng));
  const Block mx = random_block(k, d, rng), my = random_block(k, d, rng);
  for (auto _ : state) {
    step_general(st, s, 1e-6, 1e-6, mx, my);
    benchmark::DoNotOptimize(st.x.data());
  }
}
BENCHMARK(BM_StepGeneral)->Args({8, 16})->Args({20, 100})->Args({64, 100});

void BM_StepNodeLevel(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const MixingMatrix m = metropolis_weights(build_graph(GraphKind::kRing, k, 1));
  std::mt19937_64 rng(1);
  NetworkState st = make_state(random_block(k, d, rng), random_block(k, d, rng));
  const Block mx = random_block(k, d, rng), my = random_block(k, d, rng);
  for (auto _ : state) {
    step_node_level(st, StrategyKind::kED, m.w(), 1e-6, 1e-6, mx, my);
    benchmark::DoNotOptimize(st.x.data());
  }
}
BENCHMARK(BM_StepNodeLevel)->Args({8, 16})->Args({20, 100});

// Args: dimension, minibatch.
void BM_GraceStep(benchmark::State& state) {
  QuadraticOptions o;
  o.agents = 1;
  o.dim_x = o.dim_y = static_cast<int>(state.range(0));
  o.samples_per_agent = 2000;
  const auto p = make_quadratic(o, 1);
  GraceConfig c = specialize(EstimatorName::kGRACE, 2000);
  c.b = static_cast<int>(state.range(1));
  EstimatorState s;
  Rng rng = make_stream(1, 0, StreamTag::kEstimator);
  const Vector x = Vector::Constant(o.dim_x, 0.1), y = Vector::Constant(o.dim_y, -0.1);
  warm_start(s, c, *p, 0, x, y, rng);
  for (auto _ : state) {
    grace_step(s, c, *p, 0, x, y, false, rng);
    benchmark::DoNotOptimize(s.g_x.data());
  }
}
BENCHMARK(BM_GraceStep)->Args({16, 5})->Args({100, 5})->Args({100, 50});

void BM_BuildTransition(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const StrategySet s = build_strategy(StrategyKind::kATC_GT, metropolis_weights(build_graph(GraphKind::kLine, k, 1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_transition(s).t_norm);
}
BENCHMARK(BM_BuildTransition)->Arg(8)->Arg(20)->Arg(64);

void BM_SpectralData(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const Matrix w = metropolis_weight_matrix(build_graph(GraphKind::kMetropolisRandom, k, 3));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_data(w).lambda_mix);
}
BENCHMARK(BM_SpectralData)->Arg(8)->Arg(20)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
