#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "treecrf/config.hpp"
#include "treecrf/energy.hpp"
#include "treecrf/pylon.hpp"
#include "treecrf/raster.hpp"
#include "treecrf/regions.hpp"
#include "treecrf/tree.hpp"

namespace treecrf {

struct SegmentInputs {
  Raster likelihoods;               // H x W x C
  Raster boundaries;                // H x W x B
  std::optional<Raster> elevation;  // H x W x 1
  std::optional<Raster> features;   // H x W x F; defaults to image channels followed by likelihoods
  std::optional<Raster> image;      // H x W x 3, required by crf-color
  std::vector<double> mu;           // C x C compatibility; empty selects Potts
};

struct SegmentResult {
  LabelMap labels;
  RegionPartition leaves;        // empty for unary-px
  std::optional<SegTree> tree;   // crf-tree only
  std::optional<EnergyModel> model;
  std::optional<PylonSolution> solution;
  ExpansionStats expansion;
  double initial_energy = 0.0;  // energy of the unary-sp labelling under the same model
  std::vector<std::string> warnings;
};

/// Runs the baseline selected by config.mode. All modes share one code path and differ
/// only in structure (pixels, leaves, flat CRF, tree) and in which potentials are on.
SegmentResult segment(const SegmentInputs& inputs, const RunConfig& config);

/// Leaf partition of a boundary raster, as used by every region-based mode.
RegionPartition leaf_partition(const Raster& boundaries, const RunConfig& config);

/// Compatibility estimated from pairs of (ground truth, leaf partition).
std::vector<double> estimate_compatibility(const std::vector<LabelMap>& truths,
                                           const std::vector<RegionPartition>& partitions, int class_count,
                                           double mu_cap, std::vector<std::string>* warnings = nullptr);

nlohmann::json energy_to_json(const EnergyModel& model, const PylonSolution* solution,
                              const ExpansionStats* stats);

}  // namespace treecrf
