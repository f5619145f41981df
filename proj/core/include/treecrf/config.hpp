#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace treecrf {

enum class Mode { kUnaryPx, kUnarySp, kCrfColor, kCrfFlat, kCrfTree };

std::string_view to_string(Mode mode);
/// Throws ValidationError on unknown names.
Mode parse_mode(std::string_view name);

enum class PlateauPolicy { kRasterScan };

/// Weights of the pairwise potentials: smoothness, edge, spatial, elevation.
struct Lambdas {
  double smoothness = 1.0;
  double edge = 1.0;
  double spatial = 1.0;
  double elevation = 1.0;

  double sum() const { return smoothness + edge + spatial + elevation; }
  friend bool operator==(const Lambdas&, const Lambdas&) = default;
};

/// Convex weights for the boundary, feature and centroid dissimilarities of the tree.
struct TreeWeights {
  double boundary = 0.6;
  double feature = 0.3;
  double centroid = 0.1;
  friend bool operator==(const TreeWeights&, const TreeWeights&) = default;
};

struct RunConfig {
  int class_count = 0;  // 0: taken from the likelihood raster
  TreeWeights tree_weights;
  double gamma = 0.1;
  Lambdas lambdas;
  double mu_cap = 10.0;
  double epsilon_prob = 1e-12;
  int min_region_px = 8;
  PlateauPolicy plateau_policy = PlateauPolicy::kRasterScan;
  std::uint64_t seed = 0;
  Mode mode = Mode::kCrfTree;
  int max_expansion_cycles = 20;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig config_from_json(const nlohmann::json& json);
nlohmann::json config_to_json(const RunConfig& config);

/// Absent keys keep their defaults. Throws ValidationError / IoError.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace treecrf
