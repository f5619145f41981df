#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "treecrf/config.hpp"
#include "treecrf/errors.hpp"

using namespace treecrf;
namespace fs = std::filesystem;

namespace {
fs::path write_text(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "treecrf_config";
  fs::create_directories(dir);
  std::ofstream(dir / name) << text;
  return dir / name;
}
}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const auto c = load_config(write_text("empty.json", ""));
  EXPECT_EQ(c, RunConfig{});
  EXPECT_DOUBLE_EQ(c.tree_weights.boundary, 0.6);
  EXPECT_DOUBLE_EQ(c.tree_weights.feature, 0.3);
  EXPECT_DOUBLE_EQ(c.tree_weights.centroid, 0.1);
  EXPECT_DOUBLE_EQ(c.gamma, 0.1);
  EXPECT_EQ(c.lambdas, (Lambdas{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(c.mu_cap, 10.0);
  EXPECT_DOUBLE_EQ(c.epsilon_prob, 1e-12);
  EXPECT_EQ(c.min_region_px, 8);
  EXPECT_EQ(load_config(write_text("obj.json", "{}")), RunConfig{});
}

TEST(Config, ConvexWeightsAccepted) {
  EXPECT_NO_THROW(config_from_json({{"w1", 0.6}, {"w2", 0.3}, {"w3", 0.1}}));
}

TEST(Config, NonConvexWeightsRejected) {
  EXPECT_THROW(config_from_json({{"w1", 0.6}, {"w2", 0.6}, {"w3", 0.1}}), ValidationError);
}

TEST(Config, UnknownModeRejected) {
  EXPECT_THROW(config_from_json({{"mode", "crf-pyramid"}}), ValidationError);
}

TEST(Config, OtherInvariants) {
  EXPECT_THROW(config_from_json({{"lambda_h", -1.0}}), ValidationError);
  EXPECT_THROW(config_from_json({{"gamma", -0.1}}), ValidationError);
  EXPECT_THROW(config_from_json({{"unknown", 1}}), ValidationError);
  EXPECT_THROW(config_from_json({{"plateau_policy", "random"}}), ValidationError);
  EXPECT_THROW(load_config(write_text("bad.json", "{")), ValidationError);
  EXPECT_THROW(load_config(fs::temp_directory_path() / "treecrf_config" / "missing.json"), IoError);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.mode = Mode::kCrfFlat;
  c.gamma = 0.25;
  c.lambdas = {0.5, 0.0, 2.0, 1.0};
  c.seed = 42;
  c.class_count = 6;
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
}

TEST(Config, ModeNames) {
  for (Mode m : {Mode::kUnaryPx, Mode::kUnarySp, Mode::kCrfColor, Mode::kCrfFlat, Mode::kCrfTree}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
}
