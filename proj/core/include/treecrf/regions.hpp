#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "treecrf/config.hpp"
#include "treecrf/raster.hpp"

namespace treecrf {

/// Aggregates over the pixels of one region.
struct RegionStats {
  double area = 0.0;
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  double elevation = 0.0;
  std::vector<double> feature;     // mean feature vector (hypercolumn stand-in)
  std::vector<double> likelihood;  // mean class likelihood

  friend bool operator==(const RegionStats&, const RegionStats&) = default;
};

/// Dense region ids 0..R-1 per pixel plus per-region statistics.
struct RegionPartition {
  IdMap map;
  int region_count = 0;
  std::vector<RegionStats> stats;

  int height() const { return map.height; }
  int width() const { return map.width; }
  std::uint32_t id(int row, int col) const { return map.ids[static_cast<std::size_t>(row) * map.width + col]; }
};

/// Optional per-pixel evidence aggregated into RegionStats.
struct RegionInputs {
  const Raster* likelihoods = nullptr;
  const Raster* features = nullptr;
  const Raster* elevation = nullptr;
};

/// Per-pixel maximum over boundary channels.
Raster fuse_boundaries(const Raster& boundary);

/// Priority-flood watershed seeded at regional minima of a single-channel landscape.
/// Regions smaller than config.min_region_px are absorbed into the neighbour with the
/// weakest shared boundary. Only area and centroid are filled in the returned stats.
RegionPartition watershed(const Raster& landscape, const RunConfig& config);

/// Builds a partition from an arbitrary id map, relabelling ids densely in raster-scan order.
RegionPartition partition_from_ids(const IdMap& ids);

/// Recomputes area, centroid and whichever optional means are available.
void compute_region_stats(RegionPartition& partition, const RegionInputs& inputs);

/// Dense ids, totality, 4-connectivity and area conservation. Fills `why` on failure.
bool check_partition(const RegionPartition& partition, std::string* why = nullptr);

struct RagEdge {
  int a = 0;  // a < b
  int b = 0;
  std::vector<std::uint32_t> boundary_pixels;  // both sides of the shared border
  double strength = 0.0;                       // mean landscape value over boundary_pixels
};

/// Region adjacency graph under 4-connectivity. Edges are sorted by (a, b).
struct Rag {
  int region_count = 0;
  std::vector<RagEdge> edges;

  /// Index into edges, or -1.
  int find_edge(int a, int b) const;
  std::vector<std::vector<int>> adjacency() const;
};

Rag build_rag(const RegionPartition& partition, const Raster& landscape);

/// Ultrametric contour map over a RAG: per-edge merge thresholds of a greedy
/// agglomeration by ascending boundary strength, plus the merge dendrogram.
struct Ucm {
  int region_count = 0;
  std::vector<double> edge_score;  // parallel to Rag::edges
  std::vector<int> parent;         // dendrogram parent per node; regions are nodes 0..R-1
  std::vector<double> height;      // merge height per node; 0 for regions

  /// Height of the lowest dendrogram node containing both regions (0 when a == b).
  double merge_height(int a, int b) const;
};

/// Score assigned between regions that never become connected through the RAG.
inline constexpr double kDisconnectedUcmScore = 1.0;

Ucm build_ucm(const Rag& rag);

nlohmann::json region_stats_json(const RegionPartition& partition);

/// Writes `<stem>.ftn` (uint32 ids) and `<stem>.json` (region stats).
void write_partition(const RegionPartition& partition, const std::filesystem::path& stem);
RegionPartition read_partition(const std::filesystem::path& ids_path);

}  // namespace treecrf
