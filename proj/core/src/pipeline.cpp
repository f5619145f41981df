#include "treecrf/pipeline.hpp"

#include "treecrf/errors.hpp"
#include "treecrf/hierarchy.hpp"

namespace treecrf {
namespace {

void require_shape(const Raster& r, const Raster& ref, const char* name) {
  if (r.height() != ref.height() || r.width() != ref.width()) {
    throw ValidationError(std::string(name) + " is " + std::to_string(r.height()) + "x" + std::to_string(r.width()) +
                          ", likelihoods are " + std::to_string(ref.height()) + "x" + std::to_string(ref.width()));
  }
}

Raster concat_channels(const Raster& a, const Raster& b) {
  Raster out(a.height(), a.width(), a.channels() + b.channels());
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    auto dst = out.pixel(p);
    const auto x = a.pixel(p);
    const auto y = b.pixel(p);
    std::copy(x.begin(), x.end(), dst.begin());
    std::copy(y.begin(), y.end(), dst.begin() + a.channels());
  }
  return out;
}

LabelMap paint(const RegionPartition& part, const std::vector<int>& region_label) {
  LabelMap out(part.height(), part.width());
  for (std::size_t p = 0; p < part.map.ids.size(); ++p) {
    out.labels()[p] = static_cast<std::uint8_t>(region_label[part.map.ids[p]]);
  }
  return out;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(v.size()); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

}  // namespace

RegionPartition leaf_partition(const Raster& boundaries, const RunConfig& config) {
  return watershed(fuse_boundaries(boundaries), config);
}

SegmentResult segment(const SegmentInputs& in, const RunConfig& config) {
  config.validate();
  const Raster& lik = in.likelihoods;
  const int classes = lik.channels();
  if (classes < 1) throw ValidationError("likelihoods have no channels");
  if (config.class_count > 0 && config.class_count != classes) {
    throw ValidationError("configured class_count " + std::to_string(config.class_count) + " but likelihoods carry " +
                          std::to_string(classes) + " channels");
  }
  if (classes > 254) throw ValidationError("at most 254 classes are supported");
  if (!lik.within_unit_interval()) throw ValidationError("likelihoods must lie in [0, 1]");

  SegmentResult res;
  if (config.mode == Mode::kUnaryPx) {
    res.labels = LabelMap(lik.height(), lik.width());
    for (std::size_t p = 0; p < lik.pixel_count(); ++p) {
      const auto px = lik.pixel(p);
      int best = 0;
      for (int k = 1; k < classes; ++k) {
        if (px[k] > px[best]) best = k;
      }
      res.labels.labels()[p] = static_cast<std::uint8_t>(best);
    }
    return res;
  }

  require_shape(in.boundaries, lik, "boundaries");
  if (in.boundaries.channels() < 1) throw ValidationError("boundaries have no channels");
  if (!in.boundaries.within_unit_interval()) throw ValidationError("boundaries must lie in [0, 1]");
  if (in.elevation) {
    require_shape(*in.elevation, lik, "elevation");
    if (in.elevation->channels() != 1) throw ValidationError("elevation must have one channel");
  }
  if (in.image) require_shape(*in.image, lik, "image");
  if (in.features) require_shape(*in.features, lik, "features");

  Lambdas lambdas = config.lambdas;
  if (config.mode == Mode::kCrfColor) lambdas = Lambdas{config.lambdas.smoothness, 0.0, 0.0, 0.0};
  if (lambdas.elevation > 0 && !in.elevation && (config.mode == Mode::kCrfFlat || config.mode == Mode::kCrfTree)) {
    throw ValidationError("elevation raster required when lambda_e > 0");
  }

  Raster features;
  if (config.mode == Mode::kCrfColor) {
    if (!in.image) throw ValidationError("crf-color needs the colour image");
    features = *in.image;
  } else if (in.features) {
    features = *in.features;
  } else if (in.image) {
    features = concat_channels(*in.image, lik);
  } else {
    features = lik;
  }

  const Raster landscape = fuse_boundaries(in.boundaries);
  res.leaves = watershed(landscape, config);
  compute_region_stats(res.leaves, RegionInputs{&lik, &features, in.elevation ? &*in.elevation : nullptr});
  const int leaves = res.leaves.region_count;

  std::vector<int> sp_label(leaves);
  for (int r = 0; r < leaves; ++r) sp_label[r] = argmax(res.leaves.stats[r].likelihood);
  if (config.mode == Mode::kUnarySp) {
    res.labels = paint(res.leaves, sp_label);
    return res;
  }

  const Rag rag = build_rag(res.leaves, landscape);
  const Ucm ucm = build_ucm(rag);
  const LeafGraph graph = make_leaf_graph(res.leaves, rag, ucm);

  Hierarchy hierarchy;
  std::vector<RegionStats> stats;
  if (config.mode == Mode::kCrfTree) {
    res.tree = build_tree(graph, config.tree_weights);
    res.tree->leaf_map = res.leaves.map;
    hierarchy = Hierarchy::from_tree(*res.tree);
    stats = node_stats(*res.tree);
  } else {
    hierarchy = Hierarchy::flat(leaves);
    stats = graph.leaves;
  }

  std::vector<double> mu = in.mu.empty() ? potts_compatibility(classes) : in.mu;
  res.model = build_energy_model(stats, graph, config, lambdas, std::move(mu));

  std::vector<int> init(hierarchy.node_count(), kInactive);
  for (int r = 0; r < leaves; ++r) init[r] = sp_label[r];
  res.initial_energy = total_energy(hierarchy, *res.model, init);
  res.solution = alpha_expansion(hierarchy, *res.model, init, &res.expansion, config.max_expansion_cycles);
  res.warnings = res.expansion.warnings;

  const auto leaf = leaf_labels(hierarchy, res.solution->node_label);
  res.labels = paint(res.leaves, leaf);
  return res;
}

std::vector<double> estimate_compatibility(const std::vector<LabelMap>& truths,
                                           const std::vector<RegionPartition>& partitions, int class_count,
                                           double mu_cap, std::vector<std::string>* warnings) {
  if (truths.size() != partitions.size()) throw ValidationError("need one partition per ground-truth map");
  if (class_count < 1) throw ValidationError("class count must be positive");
  CoocCounts counts(class_count);
  for (std::size_t k = 0; k < truths.size(); ++k) accumulate_cooccurrences(counts, truths[k], partitions[k]);
  return compatibility(counts, mu_cap, warnings);
}

nlohmann::json energy_to_json(const EnergyModel& m, const PylonSolution* solution, const ExpansionStats* stats) {
  nlohmann::json unary = nlohmann::json::array();
  for (int i = 0; i < m.node_count; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.class_count; ++c) row.push_back(m.unary_at(i, c));
    unary.push_back(std::move(row));
  }
  nlohmann::json pairwise = nlohmann::json::array();
  for (const auto& t : m.pairwise) {
    pairwise.push_back({{"a", t.a},
                        {"b", t.b},
                        {"smoothness", t.smoothness},
                        {"edge", t.edge},
                        {"spatial", t.spatial},
                        {"elevation", t.elevation},
                        {"weighted", t.weighted}});
  }
  nlohmann::json j = {
      {"class_count", m.class_count},
      {"node_count", m.node_count},
      {"gamma", m.gamma},
      {"lambdas",
       {{"smoothness", m.lambdas.smoothness},
        {"edge", m.lambdas.edge},
        {"spatial", m.lambdas.spatial},
        {"elevation", m.lambdas.elevation}}},
      {"sigmas",
       {{"smoothness", m.sigmas.smoothness},
        {"edge", m.sigmas.edge},
        {"spatial", m.sigmas.spatial},
        {"elevation", m.sigmas.elevation}}},
      {"mu", m.mu},
      {"unary", unary},
      {"pairwise", pairwise},
  };
  if (solution) {
    j["node_label"] = solution->node_label;
    j["energy"] = solution->energy;
  }
  if (stats) {
    j["expansion"] = {{"energy_trace", stats->energy_trace},
                      {"cycles", stats->cycles},
                      {"committed_moves", stats->committed_moves},
                      {"unlabeled_variables", stats->unlabeled_variables},
                      {"converged", stats->converged},
                      {"warnings", stats->warnings}};
  }
  return j;
}

}  // namespace treecrf
