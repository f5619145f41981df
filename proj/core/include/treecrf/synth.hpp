#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "treecrf/raster.hpp"

namespace treecrf {

/// Axis-aligned object painted over the class-0 background; later objects cover earlier ones.
struct SceneObject {
  int row = 0;
  int col = 0;
  int height = 1;
  int width = 1;
  int cls = 1;
  double elevation_offset = 0.0;
};

struct SceneSpec {
  int height = 128;
  int width = 128;
  int class_count = 4;
  std::vector<SceneObject> objects;
  double noise = 0.3;  // likelihood noise level
  int blur_radius = 1;
  std::uint64_t seed = 0;

  /// Throws ValidationError when an object leaves the image or a value is out of range.
  void validate() const;
};

nlohmann::json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& json);

/// Random layout: a few buildings and fields as large rectangles, plus small car-sized
/// blobs of the last class.
SceneSpec random_scene_spec(int height, int width, int class_count, double noise, std::uint64_t seed);

struct Scene {
  Raster image;        // H x W x 3
  LabelMap truth;
  Raster likelihoods;  // H x W x C, in [0, 1]
  Raster boundaries;   // H x W x C, in [0, 1]
  Raster elevation;    // H x W x 1
};

/// Deterministic for a fixed spec. With zero noise the likelihood argmax is the truth.
Scene synthesize(const SceneSpec& spec);

/// Portable draws on top of a fixed 64-bit engine, so outputs do not depend on the
/// standard library's distribution implementations.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi);  // inclusive bounds
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace treecrf
