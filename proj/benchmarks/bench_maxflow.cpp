#include <benchmark/benchmark.h>

#include <random>

#include "treecrf/maxflow.hpp"

namespace {

// 4-connected grid with random terminal and neighbour capacities.
void BM_GridCut(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> term(0, 20);
  std::uniform_int_distribution<int> pair(0, 10);
  std::vector<std::tuple<int, int, double>> arcs;
  std::vector<std::pair<double, double>> caps(side * side);
  for (int i = 0; i < side * side; ++i) {
    caps[i] = {term(rng), term(rng)};
    if (i % side + 1 < side) arcs.emplace_back(i, i + 1, pair(rng));
    if (i + side < side * side) arcs.emplace_back(i, i + side, pair(rng));
  }
  for (auto _ : state) {
    treecrf::MaxFlowGraph g(side * side);
    for (int i = 0; i < side * side; ++i) g.add_terminal_weights(i, caps[i].first, caps[i].second);
    for (auto [a, b, c] : arcs) g.add_edge(a, b, c, c);
    benchmark::DoNotOptimize(g.solve());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(side) * side);
}

}  // namespace

BENCHMARK(BM_GridCut)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond)->Complexity();

BENCHMARK_MAIN();
