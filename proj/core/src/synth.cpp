#include "treecrf/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "treecrf/errors.hpp"
#include "treecrf/eval.hpp"

namespace treecrf {

int SceneRng::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(static_cast<std::uint64_t>(uniform() * static_cast<double>(span)) % span);
}

double SceneRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

void SceneSpec::validate() const {
  if (height <= 0 || width <= 0) throw ValidationError("scene size must be positive");
  if (class_count < 2 || class_count > 254) throw ValidationError("scene class count must be in [2, 254]");
  if (!(noise >= 0)) throw ValidationError("likelihood noise must be >= 0");
  if (blur_radius < 0) throw ValidationError("blur radius must be >= 0");
  for (const auto& o : objects) {
    if (o.height <= 0 || o.width <= 0 || o.row < 0 || o.col < 0 || o.row + o.height > height ||
        o.col + o.width > width) {
      throw ValidationError("scene object outside the image");
    }
    if (o.cls < 0 || o.cls >= class_count) throw ValidationError("scene object class out of range");
  }
}

nlohmann::json scene_spec_to_json(const SceneSpec& s) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"row", o.row},
                       {"col", o.col},
                       {"height", o.height},
                       {"width", o.width},
                       {"class", o.cls},
                       {"elevation_offset", o.elevation_offset}});
  }
  return {{"height", s.height}, {"width", s.width},           {"class_count", s.class_count}, {"objects", objects},
          {"noise", s.noise},   {"blur_radius", s.blur_radius}, {"seed", s.seed}};
}

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  try {
    SceneSpec s;
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    s.class_count = j.value("class_count", s.class_count);
    s.noise = j.value("noise", s.noise);
    s.blur_radius = j.value("blur_radius", s.blur_radius);
    s.seed = j.value("seed", s.seed);
    for (const auto& o : j.value("objects", nlohmann::json::array())) {
      s.objects.push_back(SceneObject{o.at("row").get<int>(), o.at("col").get<int>(), o.at("height").get<int>(),
                                      o.at("width").get<int>(), o.at("class").get<int>(),
                                      o.value("elevation_offset", 0.0)});
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scene spec: ") + e.what());
  }
}

SceneSpec random_scene_spec(int height, int width, int class_count, double noise, std::uint64_t seed) {
  SceneSpec s;
  s.height = height;
  s.width = width;
  s.class_count = class_count;
  s.noise = noise;
  s.seed = seed;
  SceneRng rng(seed ^ 0x5ce7e5eedULL);
  const int big = std::max(2, class_count - 1);  // classes available for large objects
  const int large_count = 5 + rng.integer(0, 4);
  const int span = std::max(4, std::min(height, width) / 3);
  for (int k = 0; k < large_count; ++k) {
    SceneObject o;
    o.height = std::min(height, rng.integer(span / 2, span));
    o.width = std::min(width, rng.integer(span / 2, span));
    o.row = rng.integer(0, height - o.height);
    o.col = rng.integer(0, width - o.width);
    o.cls = class_count > 2 ? 1 + rng.integer(0, big - 2) : 1;
    o.elevation_offset = rng.uniform(-1.0, 1.0);
    s.objects.push_back(o);
  }
  if (class_count > 2) {
    const int small_count = 6 + rng.integer(0, 6);
    for (int k = 0; k < small_count; ++k) {
      SceneObject o;
      const bool upright = rng.uniform() < 0.5;
      o.height = std::min(height, upright ? 8 : 4);
      o.width = std::min(width, upright ? 4 : 8);
      o.row = rng.integer(0, height - o.height);
      o.col = rng.integer(0, width - o.width);
      o.cls = class_count - 1;
      o.elevation_offset = rng.uniform(0.0, 0.3);
      s.objects.push_back(o);
    }
  }
  return s;
}

namespace {

// Smooth random field in [-1, 1]: uniform values on a coarse lattice, bilinearly interpolated.
std::vector<double> coarse_field(int h, int w, int cell, SceneRng& rng) {
  const int gh = h / cell + 2;
  const int gw = w / cell + 2;
  std::vector<double> grid(static_cast<std::size_t>(gh) * gw);
  for (auto& v : grid) v = rng.uniform(-1.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    const double fr = static_cast<double>(r) / cell;
    const int r0 = static_cast<int>(fr);
    const double tr = fr - r0;
    for (int c = 0; c < w; ++c) {
      const double fc = static_cast<double>(c) / cell;
      const int c0 = static_cast<int>(fc);
      const double tc = fc - c0;
      auto g = [&](int i, int j) { return grid[static_cast<std::size_t>(i) * gw + j]; };
      out[static_cast<std::size_t>(r) * w + c] = (1 - tr) * ((1 - tc) * g(r0, c0) + tc * g(r0, c0 + 1)) +
                                                 tr * ((1 - tc) * g(r0 + 1, c0) + tc * g(r0 + 1, c0 + 1));
    }
  }
  return out;
}

double squash(double z) { return 1.0 / (1.0 + std::exp(-6.0 * (z - 0.5))); }

}  // namespace

Scene synthesize(const SceneSpec& spec) {
  spec.validate();
  const int h = spec.height;
  const int w = spec.width;
  const int classes = spec.class_count;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  SceneRng rng(spec.seed);

  Scene scene;
  scene.truth = LabelMap(h, w, 0);
  std::vector<double> offset(n, 0.0);
  for (const auto& o : spec.objects) {
    for (int r = o.row; r < o.row + o.height; ++r) {
      for (int c = o.col; c < o.col + o.width; ++c) {
        scene.truth.at(r, c) = static_cast<std::uint8_t>(o.cls);
        offset[static_cast<std::size_t>(r) * w + c] = o.elevation_offset;
      }
    }
  }

  // Class appearance: a fixed colour per class and a base height.
  std::vector<std::array<double, 3>> colour(classes);
  std::vector<double> base(classes);
  for (int k = 0; k < classes; ++k) {
    for (auto& v : colour[k]) v = rng.uniform(0.1, 0.9);
    base[k] = k == 0 ? 0.0 : rng.uniform(0.5, 8.0);
  }

  scene.image = Raster(h, w, 3);
  scene.elevation = Raster(h, w, 1);
  for (std::size_t p = 0; p < n; ++p) {
    const int l = scene.truth.labels()[p];
    for (int ch = 0; ch < 3; ++ch) {
      scene.image.pixel(p)[ch] = static_cast<float>(std::clamp(colour[l][ch] + 0.08 * rng.normal(), 0.0, 1.0));
    }
    scene.elevation.values()[p] = static_cast<float>(base[l] + offset[p] + 0.1 * rng.normal());
  }

  // Likelihoods: one-hot evidence perturbed by blotchy plus per-pixel noise, then a sigmoid.
  scene.likelihoods = Raster(h, w, classes);
  const int cell = std::max(2, std::min(h, w) / 16);
  for (int k = 0; k < classes; ++k) {
    const auto blotch = coarse_field(h, w, cell, rng);
    for (std::size_t p = 0; p < n; ++p) {
      const double hot = scene.truth.labels()[p] == k ? 1.0 : 0.0;
      const double z = hot + spec.noise * (2.0 * blotch[p] + 1.5 * rng.normal());
      scene.likelihoods.pixel(p)[k] = static_cast<float>(squash(z));
    }
  }

  // Boundaries: class-specific 1 px lines, box-blurred, peak-normalized, lightly perturbed.
  const Raster lines = boundary_gt(scene.truth, classes, 1);
  scene.boundaries = Raster(h, w, classes);
  const int br = spec.blur_radius;
  for (int k = 0; k < classes; ++k) {
    std::vector<double> blurred(n, 0.0);
    double peak = 0.0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double sum = 0.0;
        int count = 0;
        for (int rr = std::max(0, r - br); rr <= std::min(h - 1, r + br); ++rr) {
          for (int cc = std::max(0, c - br); cc <= std::min(w - 1, c + br); ++cc) {
            sum += lines.at(rr, cc, k);
            ++count;
          }
        }
        // Centre-weighted so the ridge stays on the line itself.
        const double v = 0.5 * lines.at(r, c, k) + 0.5 * sum / count;
        blurred[static_cast<std::size_t>(r) * w + c] = v;
        peak = std::max(peak, v);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      const double v = (peak > 0 ? blurred[p] / peak : 0.0) + 0.15 * spec.noise * rng.uniform(-1.0, 1.0);
      scene.boundaries.pixel(p)[k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return scene;
}

}  // namespace treecrf
