#include <benchmark/benchmark.h>

#include "treecrf/pipeline.hpp"
#include "treecrf/synth.hpp"

namespace {

treecrf::SegmentInputs scene_inputs(int side) {
  const auto s = treecrf::synthesize(treecrf::random_scene_spec(side, side, 4, 0.3, 1));
  treecrf::SegmentInputs in;
  in.likelihoods = s.likelihoods;
  in.boundaries = s.boundaries;
  in.elevation = s.elevation;
  in.image = s.image;
  return in;
}

void BM_Segment(benchmark::State& state, treecrf::Mode mode) {
  const auto in = scene_inputs(static_cast<int>(state.range(0)));
  treecrf::RunConfig cfg;
  cfg.mode = mode;
  for (auto _ : state) benchmark::DoNotOptimize(treecrf::segment(in, cfg));
}

void BM_Leaves(benchmark::State& state) {
  const auto in = scene_inputs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(treecrf::leaf_partition(in.boundaries, treecrf::RunConfig{}));
}

}  // namespace

BENCHMARK(BM_Leaves)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Segment, crf_flat, treecrf::Mode::kCrfFlat)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Segment, crf_tree, treecrf::Mode::kCrfTree)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
