#include <gtest/gtest.h>

#include "treecrf/errors.hpp"
#include "treecrf/eval.hpp"
#include "treecrf/synth.hpp"

using namespace treecrf;

namespace {

LabelMap argmax(const Raster& lik) {
  LabelMap out(lik.height(), lik.width());
  for (std::size_t p = 0; p < lik.pixel_count(); ++p) {
    const auto px = lik.pixel(p);
    int best = 0;
    for (int k = 1; k < lik.channels(); ++k) {
      if (px[k] > px[best]) best = k;
    }
    out.labels()[p] = static_cast<std::uint8_t>(best);
  }
  return out;
}

}  // namespace

TEST(Synth, NoiselessArgmaxIsTruth) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = synthesize(random_scene_spec(64, 64, 4, 0.0, seed));
    EXPECT_EQ(argmax(s.likelihoods), s.truth);
  }
}

TEST(Synth, Deterministic) {
  const auto spec = random_scene_spec(48, 40, 4, 0.3, 9);
  const auto a = synthesize(spec);
  const auto b = synthesize(spec);
  EXPECT_EQ(a.likelihoods, b.likelihoods);
  EXPECT_EQ(a.boundaries, b.boundaries);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.image, b.image);
}

TEST(Synth, RangesAndShapes) {
  const auto s = synthesize(random_scene_spec(32, 48, 5, 0.3, 4));
  EXPECT_TRUE(s.likelihoods.within_unit_interval());
  EXPECT_TRUE(s.boundaries.within_unit_interval());
  EXPECT_TRUE(s.image.within_unit_interval());
  EXPECT_TRUE(s.elevation.all_finite());
  EXPECT_EQ(s.likelihoods.channels(), 5);
  EXPECT_EQ(s.truth.height(), 32);
  EXPECT_EQ(s.truth.width(), 48);
  EXPECT_TRUE(s.truth.valid_for(5));
}

TEST(Synth, NoiseCorruptsPixelArgmax) {
  const auto s = synthesize(random_scene_spec(128, 128, 4, 0.3, 5));
  const auto m = metrics(confusion(s.truth, argmax(s.likelihoods), 4));
  EXPECT_LT(m.overall_accuracy, 0.95);
  EXPECT_GT(m.overall_accuracy, 0.5);
}

TEST(Synth, SpecJsonRoundTrip) {
  const auto spec = random_scene_spec(20, 30, 3, 0.2, 6);
  const auto back = scene_spec_from_json(scene_spec_to_json(spec));
  EXPECT_EQ(scene_spec_to_json(back), scene_spec_to_json(spec));
  SceneSpec bad;
  bad.objects.push_back(SceneObject{120, 120, 20, 20, 1, 0});
  EXPECT_THROW(bad.validate(), ValidationError);
}
