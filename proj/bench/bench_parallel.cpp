// Serial reference (workers = 1) against the OpenMP kernels. The second
// benchmark argument is the worker count; 0 means the OpenMP default.

#include <benchmark/benchmark.h>

#include "corrlab/correlation.hpp"
#include "corrlab/fixtures.hpp"
#include "corrlab/gaussian_correlation.hpp"
#include "corrlab/stable_model.hpp"

namespace {

using namespace corrlab;

corrlab::Execution exec_of(const benchmark::State& state) { return {static_cast<int>(state.range(1))}; }

void set_items(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ProductMeasure(benchmark::State& state) {
  const auto box = ConvexBody::unit_box(2);
  const auto blocks = CovarianceBlocks::scaled_identity(2, 0.5);
  for (auto _ : state) {
    auto r = product_measure_mc(blocks, box, box, static_cast<std::size_t>(state.range(0)), RngStream(1, 0),
                                exec_of(state));
    benchmark::DoNotOptimize(r);
  }
  set_items(state);
}

void BM_CorrelationGap(benchmark::State& state) {
  const auto fx = triangle_product_fixtures(1).front();
  for (auto _ : state) {
    auto r = correlation_gap_mc(fx.model, fx.xi, fx.split, fx.f, fx.g, static_cast<std::size_t>(state.range(0)),
                                RngStream(1, 0), exec_of(state));
    benchmark::DoNotOptimize(r);
  }
  set_items(state);
}

void BM_Curvature(benchmark::State& state) {
  const auto box = ConvexBody::unit_box(3);
  for (auto _ : state) {
    auto r = curvature_mc(box, static_cast<std::size_t>(state.range(0)), RngStream(1, 0), exec_of(state));
    benchmark::DoNotOptimize(r);
  }
  set_items(state);
}

void BM_CharFunction(benchmark::State& state) {
  RngStream gen(100, 0);
  const auto model = random_stable_model(gen, 1.5, 2, 4);
  const std::vector<std::vector<double>> grid = {{0.5, 0.0}, {0.0, 0.5}, {1.0, -1.0}};
  for (auto _ : state) {
    auto r = empirical_char_function(model, grid, static_cast<std::size_t>(state.range(0)), RngStream(1, 0),
                                     exec_of(state));
    benchmark::DoNotOptimize(r);
  }
  set_items(state);
}

void worker_grid(benchmark::internal::Benchmark* b) {
  for (int workers : {1, 0}) b->Args({1 << 18, workers});
  b->ArgNames({"samples", "workers"})->Unit(benchmark::kMillisecond)->UseRealTime();
}

BENCHMARK(BM_ProductMeasure)->Apply(worker_grid);
BENCHMARK(BM_CorrelationGap)->Apply(worker_grid);
BENCHMARK(BM_Curvature)->Apply(worker_grid);
BENCHMARK(BM_CharFunction)->Apply(worker_grid);

}  // namespace

BENCHMARK_MAIN();
