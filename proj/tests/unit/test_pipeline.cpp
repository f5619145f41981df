#include <gtest/gtest.h>

#include "treecrf/errors.hpp"
#include "treecrf/eval.hpp"
#include "treecrf/pipeline.hpp"
#include "treecrf/synth.hpp"

using namespace treecrf;

namespace {

SegmentInputs inputs_for(const Scene& s) {
  SegmentInputs in;
  in.likelihoods = s.likelihoods;
  in.boundaries = s.boundaries;
  in.elevation = s.elevation;
  in.image = s.image;
  return in;
}

RunConfig with_mode(Mode m) {
  RunConfig c;
  c.mode = m;
  return c;
}

}  // namespace

TEST(Segment, UnaryPixelIsArgmax) {
  const Raster lik(1, 3, 3, std::vector<float>{0.1f, 0.8f, 0.1f, 0.9f, 0.0f, 0.1f, 0.2f, 0.2f, 0.6f});
  SegmentInputs in;
  in.likelihoods = lik;
  const auto res = segment(in, with_mode(Mode::kUnaryPx));
  EXPECT_EQ(res.labels.labels(), (std::vector<std::uint8_t>{1, 0, 2}));
}

TEST(Segment, AllModesProduceValidLabels) {
  const auto scene = synthesize(random_scene_spec(48, 48, 4, 0.3, 3));
  const auto in = inputs_for(scene);
  for (Mode m : {Mode::kUnaryPx, Mode::kUnarySp, Mode::kCrfColor, Mode::kCrfFlat, Mode::kCrfTree}) {
    const auto res = segment(in, with_mode(m));
    EXPECT_EQ(res.labels.height(), 48);
    EXPECT_EQ(res.labels.width(), 48);
    EXPECT_TRUE(res.labels.valid_for(4)) << to_string(m);
    if (res.solution) {
      EXPECT_LE(res.solution->energy, res.initial_energy + 1e-9 * std::abs(res.initial_energy)) << to_string(m);
      EXPECT_TRUE(res.expansion.converged);
    }
  }
}

TEST(Segment, UnarySuperpixelIsConstantPerLeaf) {
  const auto scene = synthesize(random_scene_spec(40, 40, 4, 0.3, 8));
  const auto res = segment(inputs_for(scene), with_mode(Mode::kUnarySp));
  std::vector<int> label(res.leaves.region_count, -1);
  for (std::size_t p = 0; p < res.labels.pixel_count(); ++p) {
    const auto id = res.leaves.map.ids[p];
    if (label[id] < 0) label[id] = res.labels.labels()[p];
    EXPECT_EQ(label[id], res.labels.labels()[p]);
  }
}

TEST(Segment, TreeSolutionEnergyIsConsistent) {
  const auto scene = synthesize(random_scene_spec(48, 48, 4, 0.3, 4));
  const auto res = segment(inputs_for(scene), with_mode(Mode::kCrfTree));
  ASSERT_TRUE(res.tree && res.model && res.solution);
  const auto h = Hierarchy::from_tree(*res.tree);
  EXPECT_TRUE(check_feasible(h, res.solution->node_label));
  EXPECT_NEAR(total_energy(h, *res.model, res.solution->node_label), res.solution->energy,
              1e-9 * std::max(1.0, std::abs(res.solution->energy)));
}

TEST(Segment, Deterministic) {
  const auto scene = synthesize(random_scene_spec(40, 40, 4, 0.3, 5));
  const auto a = segment(inputs_for(scene), with_mode(Mode::kCrfTree));
  const auto b = segment(inputs_for(scene), with_mode(Mode::kCrfTree));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.solution->energy, b.solution->energy);
}

TEST(Segment, InputErrors) {
  const auto scene = synthesize(random_scene_spec(24, 24, 3, 0.3, 6));
  auto in = inputs_for(scene);
  in.elevation.reset();
  EXPECT_THROW(segment(in, with_mode(Mode::kCrfTree)), ValidationError);
  auto no_elev = with_mode(Mode::kCrfTree);
  no_elev.lambdas.elevation = 0;
  EXPECT_NO_THROW(segment(in, no_elev));

  auto no_image = inputs_for(scene);
  no_image.image.reset();
  EXPECT_THROW(segment(no_image, with_mode(Mode::kCrfColor)), ValidationError);

  auto bad_shape = inputs_for(scene);
  bad_shape.boundaries = Raster(10, 10, 1);
  EXPECT_THROW(segment(bad_shape, with_mode(Mode::kCrfFlat)), ValidationError);

  auto bad_classes = with_mode(Mode::kCrfTree);
  bad_classes.class_count = 5;
  EXPECT_THROW(segment(inputs_for(scene), bad_classes), ValidationError);

  auto bad_mu = inputs_for(scene);
  bad_mu.mu = {0, 1, 1, 0};
  EXPECT_THROW(segment(bad_mu, with_mode(Mode::kCrfTree)), ValidationError);
}

TEST(Segment, RegularizationBeatsPixelsOnNoisyScenes) {
  double px = 0, tree = 0;
  for (std::uint64_t seed = 100; seed < 104; ++seed) {
    const auto scene = synthesize(random_scene_spec(64, 64, 4, 0.3, seed));
    const auto in = inputs_for(scene);
    px += metrics(confusion(scene.truth, segment(in, with_mode(Mode::kUnaryPx)).labels, 4)).overall_accuracy;
    auto cfg = with_mode(Mode::kCrfTree);
    cfg.gamma = 0.3;
    cfg.lambdas = Lambdas{0.1, 0.1, 0.1, 0.1};
    tree += metrics(confusion(scene.truth, segment(in, cfg).labels, 4)).overall_accuracy;
  }
  EXPECT_GT(tree, px);
}

TEST(Compatibility, EstimatedFromTruthAndLeaves) {
  const auto scene = synthesize(random_scene_spec(48, 48, 4, 0.3, 7));
  const auto leaves = leaf_partition(scene.boundaries, RunConfig{});
  std::vector<std::string> warnings;
  const auto mu = estimate_compatibility({scene.truth}, {leaves}, 4, 10.0, &warnings);
  ASSERT_EQ(mu.size(), 16u);
  for (int a = 0; a < 4; ++a) {
    EXPECT_EQ(mu[a * 4 + a], 0.0);
    for (int b = 0; b < 4; ++b) EXPECT_EQ(mu[a * 4 + b], mu[b * 4 + a]);
  }
  EXPECT_THROW(estimate_compatibility({scene.truth}, {}, 4, 10.0), ValidationError);
}
