#include "treecrf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "treecrf/errors.hpp"

namespace treecrf {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kUnaryPx: return "unary-px";
    case Mode::kUnarySp: return "unary-sp";
    case Mode::kCrfColor: return "crf-color";
    case Mode::kCrfFlat: return "crf-flat";
    case Mode::kCrfTree: return "crf-tree";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kUnaryPx, Mode::kUnarySp, Mode::kCrfColor, Mode::kCrfFlat, Mode::kCrfTree}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown mode '" + std::string(name) +
                        "' (expected unary-px, unary-sp, crf-color, crf-flat or crf-tree)");
}

void RunConfig::validate() const {
  const auto& w = tree_weights;
  if (w.boundary < 0 || w.feature < 0 || w.centroid < 0) {
    throw ValidationError("tree weights must be non-negative");
  }
  if (std::abs(w.boundary + w.feature + w.centroid - 1.0) > 1e-9) {
    throw ValidationError("tree weights must be convex (w1+w2+w3 == 1)");
  }
  if (lambdas.smoothness < 0 || lambdas.edge < 0 || lambdas.spatial < 0 || lambdas.elevation < 0) {
    throw ValidationError("lambdas must be non-negative");
  }
  if (!(gamma >= 0)) throw ValidationError("gamma must be non-negative");
  if (class_count < 0 || class_count > 254) throw ValidationError("class_count must be in 0..254");
  if (!(mu_cap > 0)) throw ValidationError("mu_cap must be positive");
  if (!(epsilon_prob > 0 && epsilon_prob < 1)) throw ValidationError("epsilon_prob must lie in (0, 1)");
  if (min_region_px < 1) throw ValidationError("min_region_px must be >= 1");
  if (max_expansion_cycles < 1) throw ValidationError("max_expansion_cycles must be >= 1");
}

namespace {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

const std::set<std::string> kKnownKeys = {
    "class_count", "w1",       "w2",           "w3",            "gamma",          "lambda_h",
    "lambda_g",    "lambda_c", "lambda_e",     "mu_cap",        "epsilon_prob",   "min_region_px",
    "plateau_policy", "seed",  "mode",         "max_expansion_cycles"};

}  // namespace

RunConfig config_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : json.items()) {
    if (!kKnownKeys.contains(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  RunConfig c;
  read_key(json, "class_count", c.class_count);
  read_key(json, "w1", c.tree_weights.boundary);
  read_key(json, "w2", c.tree_weights.feature);
  read_key(json, "w3", c.tree_weights.centroid);
  read_key(json, "gamma", c.gamma);
  read_key(json, "lambda_h", c.lambdas.smoothness);
  read_key(json, "lambda_g", c.lambdas.edge);
  read_key(json, "lambda_c", c.lambdas.spatial);
  read_key(json, "lambda_e", c.lambdas.elevation);
  read_key(json, "mu_cap", c.mu_cap);
  read_key(json, "epsilon_prob", c.epsilon_prob);
  read_key(json, "min_region_px", c.min_region_px);
  read_key(json, "seed", c.seed);
  read_key(json, "max_expansion_cycles", c.max_expansion_cycles);
  if (json.contains("mode")) {
    std::string m;
    read_key(json, "mode", m);
    c.mode = parse_mode(m);
  }
  if (json.contains("plateau_policy")) {
    std::string p;
    read_key(json, "plateau_policy", p);
    if (p != "raster-scan") throw ValidationError("unknown plateau_policy '" + p + "'");
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  return {
      {"class_count", c.class_count},
      {"w1", c.tree_weights.boundary},
      {"w2", c.tree_weights.feature},
      {"w3", c.tree_weights.centroid},
      {"gamma", c.gamma},
      {"lambda_h", c.lambdas.smoothness},
      {"lambda_g", c.lambdas.edge},
      {"lambda_c", c.lambdas.spatial},
      {"lambda_e", c.lambdas.elevation},
      {"mu_cap", c.mu_cap},
      {"epsilon_prob", c.epsilon_prob},
      {"min_region_px", c.min_region_px},
      {"plateau_policy", "raster-scan"},
      {"seed", c.seed},
      {"mode", std::string(to_string(c.mode))},
      {"max_expansion_cycles", c.max_expansion_cycles},
  };
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // An empty file stands for an empty object.
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return config_from_json(nlohmann::json::object());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace treecrf
