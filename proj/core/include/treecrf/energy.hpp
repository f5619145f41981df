#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treecrf/config.hpp"
#include "treecrf/hierarchy.hpp"
#include "treecrf/raster.hpp"
#include "treecrf/regions.hpp"
#include "treecrf/tree.hpp"

namespace treecrf {

// Individual potentials. Each pairwise potential lies in (0, 1].

/// -log(area^gamma * p) with p clamped to [epsilon, 1].
double unary_potential(double area, double likelihood, double gamma, double epsilon);
double smoothness_potential(std::span<const double> a, std::span<const double> b, double sigma);
double edge_potential(double ucm_score, double sigma);
double spatial_potential(double row_a, double col_a, double row_b, double col_b, double sigma);
double elevation_potential(double elevation_a, double elevation_b, double sigma);

struct Sigmas {
  double smoothness = 1.0;
  double edge = 1.0;
  double spatial = 1.0;
  double elevation = 1.0;
};

/// Medians over the leaf adjacency: squared feature distance, UCM score, squared
/// centroid distance, absolute elevation difference. A zero median falls back to the
/// mean of the positive values, and to 1 when there are none.
Sigmas median_sigmas(const LeafGraph& graph);

struct PairwiseTerm {
  int a = 0;  // leaf ids
  int b = 0;
  double smoothness = 0.0;
  double edge = 0.0;
  double spatial = 0.0;
  double elevation = 0.0;
  double weighted = 0.0;  // lambda-weighted sum
};

double pairwise_sum(const PairwiseTerm& term, const Lambdas& lambdas);

/// Symmetric C x C label-pair counts over adjacent leaves.
struct CoocCounts {
  int class_count = 0;
  std::vector<std::uint64_t> counts;

  explicit CoocCounts(int classes = 0)
      : class_count(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}
  std::uint64_t& at(int a, int b) { return counts[static_cast<std::size_t>(a) * class_count + b]; }
  std::uint64_t at(int a, int b) const { return counts[static_cast<std::size_t>(a) * class_count + b]; }
  void add_pair(int a, int b);
};

/// Majority ground-truth label per leaf (kIgnore when a leaf has only ignored pixels).
std::vector<std::uint8_t> leaf_majority_labels(const LabelMap& gt, const RegionPartition& leaves, int class_count);

/// Adds one count per adjacent pair of labelled leaves.
void accumulate_cooccurrences(CoocCounts& counts, const LabelMap& gt, const RegionPartition& leaves);

/// -log of the symmetrized conditional co-occurrence frequency, diagonal forced to 0,
/// unseen pairs and the upper range clamped at mu_cap. Row-major C x C.
std::vector<double> compatibility(const CoocCounts& counts, double mu_cap, std::vector<std::string>* warnings = nullptr);

/// 0 on the diagonal, 1 elsewhere.
std::vector<double> potts_compatibility(int class_count);

struct EnergyModel {
  int class_count = 0;
  int node_count = 0;
  std::vector<double> unary;  // node-major, node_count x class_count
  std::vector<PairwiseTerm> pairwise;
  std::vector<double> mu;  // class_count x class_count
  Sigmas sigmas;
  Lambdas lambdas;
  double gamma = 0.0;

  double unary_at(int node, int label) const { return unary[static_cast<std::size_t>(node) * class_count + label]; }
  double mu_at(int a, int b) const { return mu[static_cast<std::size_t>(a) * class_count + b]; }
};

/// Unaries for every node in `nodes` (leaves first), pairwise terms over the leaf adjacency.
EnergyModel build_energy_model(const std::vector<RegionStats>& nodes, const LeafGraph& leaves,
                               const RunConfig& config, const Lambdas& lambdas, std::vector<double> mu);

/// Node statistics in node order for a tree (all nodes) or a flat leaf set.
std::vector<RegionStats> node_stats(const SegTree& tree);

/// Sum of active-node unaries plus mu-weighted pairwise terms over leaf edges. Throws
/// ValidationError naming the leaf and path when the labelling is infeasible.
double total_energy(const Hierarchy& hierarchy, const EnergyModel& model, const std::vector<int>& node_label);

}  // namespace treecrf
