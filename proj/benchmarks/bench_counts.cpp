#include <benchmark/benchmark.h>

#include <vector>

#include "dptree/count.hpp"
#include "dptree/measure.hpp"
#include "dptree/scaling.hpp"

namespace {

const dptree::DiscreteMeasure& cantor_cloud() {
  static const dptree::DiscreteMeasure m = [] {
    const auto factor = dptree::cantor_1d(0.25, 3, 4);
    return dptree::shift_to_box(dptree::product_measure(factor, factor), 0.3);
  }();
  return m;
}

void BM_EdgeSum(benchmark::State& state) {
  const auto& m = cantor_cloud();
  const bool pruning = state.range(0) != 0;
  const double eps = 1.0 / static_cast<double>(state.range(1));
  const auto t = dptree::select_interval(m).midpoint();
  dptree::VertexPotential f{std::vector<double>(m.size(), 1.0), 0};
  dptree::EdgeSumStats stats;
  for (auto _ : state) {
    stats = {};
    auto out = dptree::edge_sum(m, f, t, eps, dptree::Kernel{}, pruning, 1, &stats);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.counters["kernel_evals"] = static_cast<double>(stats.kernel_evals);
}
BENCHMARK(BM_EdgeSum)->ArgsProduct({{0, 1}, {8, 32, 128}})->Unit(benchmark::kMillisecond);

void BM_TreeDpVsNaive(benchmark::State& state) {
  const bool naive = state.range(0) != 0;
  const auto points = static_cast<std::size_t>(state.range(1));
  const auto m = dptree::uniform_cube_sample(points, 2, 0.3, 7);
  const auto tree = dptree::path_tree(2);
  const auto gaps = dptree::GapSpec::scalar(0.9, 0.05);
  dptree::DpOptions options;
  options.threads = 1;
  for (auto _ : state) {
    const auto r = naive ? dptree::naive_count(m, tree, gaps) : dptree::tree_dp_count(m, tree, gaps, options);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_TreeDpVsNaive)->ArgsProduct({{0, 1}, {50, 100, 200}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
