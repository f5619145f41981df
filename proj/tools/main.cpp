#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "treecrf/config.hpp"
#include "treecrf/errors.hpp"
#include "treecrf/eval.hpp"
#include "treecrf/pipeline.hpp"
#include "treecrf/synth.hpp"
#include "treecrf/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace treecrf;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on " + path.string());
}

std::optional<Raster> optional_raster(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_raster(path);
}

RunConfig base_config(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

int max_label(const LabelMap& m) {
  int best = -1;
  for (auto l : m.labels()) {
    if (l != kIgnore) best = std::max<int>(best, l);
  }
  return best;
}

struct SegmentArgs {
  std::string config, mode, out, likelihoods, boundaries, elevation, features, image, mu;
  std::optional<std::uint64_t> seed;
  bool dump_tree = false;
  bool dump_energy = false;
};

void run_segment(const SegmentArgs& a) {
  RunConfig config = base_config(a.config);
  if (!a.mode.empty()) config.mode = parse_mode(a.mode);
  if (a.seed) config.seed = *a.seed;
  config.validate();

  SegmentInputs in;
  in.likelihoods = read_raster(a.likelihoods);
  if (config.mode != Mode::kUnaryPx) {
    if (a.boundaries.empty()) throw ValidationError("--boundaries is required for region-based modes");
    in.boundaries = read_raster(a.boundaries);
  }
  in.elevation = optional_raster(a.elevation);
  in.features = optional_raster(a.features);
  in.image = optional_raster(a.image);
  if (!a.mu.empty()) {
    int size = 0;
    in.mu = read_matrix(a.mu, size);
    if (size != in.likelihoods.channels()) throw ValidationError("mu matrix size differs from class count");
  }

  const auto res = segment(in, config);
  make_dir(a.out);
  write_tensor(res.labels, fs::path(a.out) / "labels.ftn");
  nlohmann::json summary = {{"mode", to_string(config.mode)},
                            {"config", config_to_json(config)},
                            {"height", res.labels.height()},
                            {"width", res.labels.width()}};
  if (config.mode != Mode::kUnaryPx) {
    write_partition(res.leaves, fs::path(a.out) / "leaves");
    summary["leaf_count"] = res.leaves.region_count;
  }
  if (res.solution) {
    summary["energy"] = res.solution->energy;
    summary["initial_energy"] = res.initial_energy;
    summary["cycles"] = res.expansion.cycles;
    summary["committed_moves"] = res.expansion.committed_moves;
    summary["warnings"] = res.warnings;
  }
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  write_json(summary, fs::path(a.out) / "summary.json");
  if (a.dump_tree) {
    if (!res.tree) throw ValidationError("--dump-tree needs --mode crf-tree");
    write_json(tree_to_json(*res.tree), fs::path(a.out) / "tree.json");
  }
  if (a.dump_energy) {
    if (!res.model) throw ValidationError("--dump-energy needs a CRF mode");
    write_json(energy_to_json(*res.model, &*res.solution, &res.expansion), fs::path(a.out) / "energy.json");
  }
}

struct CoocArgs {
  std::string config, out;
  std::vector<std::string> gt, partitions, boundaries;
  int classes = 0;
};

void run_cooc(const CoocArgs& a) {
  RunConfig config = base_config(a.config);
  if (a.gt.empty()) throw ValidationError("at least one --gt is required");
  const auto& sources = a.partitions.empty() ? a.boundaries : a.partitions;
  if (sources.size() != a.gt.size()) {
    throw ValidationError("give one --partition (or --boundaries) per --gt");
  }
  std::vector<LabelMap> truths;
  std::vector<RegionPartition> parts;
  int classes = a.classes > 0 ? a.classes : config.class_count;
  int seen_max = -1;
  for (std::size_t k = 0; k < a.gt.size(); ++k) {
    truths.push_back(read_labels(a.gt[k]));
    seen_max = std::max(seen_max, max_label(truths.back()));
    parts.push_back(a.partitions.empty() ? leaf_partition(read_raster(a.boundaries[k]), config)
                                         : partition_from_ids(read_ids(a.partitions[k])));
  }
  if (classes <= 0) classes = seen_max + 1;
  std::vector<std::string> warnings;
  const auto mu = estimate_compatibility(truths, parts, classes, config.mu_cap, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  make_dir(a.out);
  write_matrix(mu, classes, fs::path(a.out) / "mu.ftn");
  write_json({{"class_count", classes}, {"mu_cap", config.mu_cap}, {"mu", mu}, {"warnings", warnings}},
             fs::path(a.out) / "mu.json");
}

struct SynthArgs {
  std::string out, scene;
  std::uint64_t seed = 0;
  int height = 128;
  int width = 128;
  int classes = 4;
  double noise = 0.3;
  int blur = 1;
};

void run_synth(const SynthArgs& a) {
  SceneSpec spec;
  if (!a.scene.empty()) {
    std::ifstream in(a.scene);
    if (!in) throw IoError("cannot open " + a.scene);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("scene spec is not valid JSON: " + std::string(e.what()));
    }
    spec = scene_spec_from_json(j);
  } else {
    spec = random_scene_spec(a.height, a.width, a.classes, a.noise, a.seed);
    spec.blur_radius = a.blur;
  }
  const Scene s = synthesize(spec);
  const fs::path out(a.out);
  make_dir(out);
  write_tensor(s.image, out / "image.ftn");
  write_tensor(s.truth, out / "gt.ftn");
  write_tensor(s.likelihoods, out / "likelihoods.ftn");
  write_tensor(s.boundaries, out / "boundaries.ftn");
  write_tensor(s.elevation, out / "elevation.ftn");
  write_json(scene_spec_to_json(spec), out / "scene.json");
}

struct EvalSegArgs {
  std::string gt, pred, out;
  int classes = 0;
  std::string name = "prediction";
};

void run_eval_seg(const EvalSegArgs& a) {
  const auto gt = read_labels(a.gt);
  const auto pred = read_labels(a.pred);
  const int classes = a.classes > 0 ? a.classes : std::max(max_label(gt), max_label(pred)) + 1;
  const auto m = metrics(confusion(gt, pred, classes));
  std::cout << metrics_table(m, a.name);
  if (!a.out.empty()) write_json(metrics_json(m), a.out);
}

struct EvalBoundaryArgs {
  std::string gt, pred, out;
  std::vector<int> tolerances{1, 3};
};

void run_eval_boundary(const EvalBoundaryArgs& a) {
  const auto gt = read_labels(a.gt);
  const auto pred = read_raster(a.pred);
  if (max_label(gt) >= pred.channels()) throw ValidationError("ground truth has more classes than boundary channels");
  nlohmann::json all = nlohmann::json::array();
  for (int t : a.tolerances) {
    const auto report = evaluate_boundaries(pred, gt, t);
    std::cout << "tolerance " << t << " px: mean AUC " << report.mean_auc << '\n';
    all.push_back(boundary_json(report, t));
  }
  if (!a.out.empty()) write_json(all, a.out);
}

struct TreeExportArgs {
  std::string config, out, boundaries, likelihoods, features, elevation;
};

void run_tree_export(const TreeExportArgs& a) {
  const RunConfig config = base_config(a.config);
  const auto boundaries = read_raster(a.boundaries);
  const auto likelihoods = read_raster(a.likelihoods);
  const auto features = optional_raster(a.features);
  const auto elevation = optional_raster(a.elevation);
  const Raster landscape = fuse_boundaries(boundaries);
  auto part = watershed(landscape, config);
  const Raster* feats = features ? &*features : &likelihoods;
  compute_region_stats(part, RegionInputs{&likelihoods, feats, elevation ? &*elevation : nullptr});
  const auto rag = build_rag(part, landscape);
  const auto ucm = build_ucm(rag);
  const auto tree = build_tree(part, rag, ucm, config.tree_weights);
  make_dir(a.out);
  write_partition(part, fs::path(a.out) / "leaves");
  write_json(tree_to_json(tree), fs::path(a.out) / "tree.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical CRF regularization of semantic segmentation"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* s = app.add_subcommand("segment", "Label an image with one of the baselines");
  s->add_option("--config", seg.config, "JSON run configuration");
  s->add_option("--mode", seg.mode, "unary-px, unary-sp, crf-color, crf-flat or crf-tree");
  s->add_option("--likelihoods", seg.likelihoods, "H x W x C class likelihoods")->required();
  s->add_option("--boundaries", seg.boundaries, "H x W x B boundary probabilities");
  s->add_option("--elevation", seg.elevation, "H x W elevation");
  s->add_option("--features", seg.features, "H x W x F region features");
  s->add_option("--image", seg.image, "H x W x 3 colour image");
  s->add_option("--mu", seg.mu, "C x C label compatibility (default Potts)");
  s->add_option("--out", seg.out, "Output directory")->required();
  s->add_option("--seed", seg.seed, "Recorded in the output configuration");
  s->add_flag("--dump-tree", seg.dump_tree, "Write tree.json");
  s->add_flag("--dump-energy", seg.dump_energy, "Write energy.json");

  CoocArgs cooc;
  auto* c = app.add_subcommand("cooc", "Estimate label compatibility from training leaves");
  c->add_option("--config", cooc.config, "JSON run configuration");
  c->add_option("--gt", cooc.gt, "Ground-truth label maps")->required();
  c->add_option("--partition", cooc.partitions, "Leaf id maps, one per --gt");
  c->add_option("--boundaries", cooc.boundaries, "Boundary rasters to oversegment, one per --gt");
  c->add_option("--classes", cooc.classes, "Class count (default from config or labels)");
  c->add_option("--out", cooc.out, "Output directory")->required();

  SynthArgs syn;
  auto* y = app.add_subcommand("synth", "Generate a synthetic scene");
  y->add_option("--out", syn.out, "Output directory")->required();
  y->add_option("--seed", syn.seed, "Random seed");
  y->add_option("--scene", syn.scene, "Explicit scene layout JSON");
  y->add_option("--height", syn.height, "Height in pixels");
  y->add_option("--width", syn.width, "Width in pixels");
  y->add_option("--classes", syn.classes, "Class count");
  y->add_option("--noise", syn.noise, "Likelihood noise level");
  y->add_option("--blur", syn.blur, "Boundary blur radius");

  EvalSegArgs es;
  auto* e = app.add_subcommand("eval-seg", "OA, AA and F1 of a label map");
  e->add_option("--gt", es.gt, "Reference labels")->required();
  e->add_option("--pred", es.pred, "Predicted labels")->required();
  e->add_option("--classes", es.classes, "Class count (default from labels)");
  e->add_option("--name", es.name, "Row name in the table");
  e->add_option("--out", es.out, "Metrics JSON path");

  EvalBoundaryArgs eb;
  auto* b = app.add_subcommand("eval-boundary", "Per-class boundary ROC/AUC");
  b->add_option("--gt", eb.gt, "Reference labels")->required();
  b->add_option("--pred", eb.pred, "Predicted boundary probabilities")->required();
  b->add_option("--tolerance", eb.tolerances, "Tolerances in pixels (odd)");
  b->add_option("--out", eb.out, "Metrics JSON path");

  TreeExportArgs te;
  auto* t = app.add_subcommand("tree-export", "Write the leaf partition and segmentation tree");
  t->add_option("--config", te.config, "JSON run configuration");
  t->add_option("--boundaries", te.boundaries, "Boundary probabilities")->required();
  t->add_option("--likelihoods", te.likelihoods, "Class likelihoods")->required();
  t->add_option("--features", te.features, "Region features (default: the likelihoods)");
  t->add_option("--elevation", te.elevation, "Elevation");
  t->add_option("--out", te.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*s) run_segment(seg);
    if (*c) run_cooc(cooc);
    if (*y) run_synth(syn);
    if (*e) run_eval_seg(es);
    if (*b) run_eval_boundary(eb);
    if (*t) run_tree_export(te);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitValidation;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitIo;
  }
  return 0;
}
