#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "treecrf/config.hpp"
#include "treecrf/regions.hpp"

namespace treecrf {

/// Adjacency between two leaves with its UCM score and border length in pixels.
struct LeafEdge {
  int a = 0;
  int b = 0;
  double ucm = 0.0;
  double length = 1.0;
};

/// Leaf regions with the statistics and adjacency the tree and the energy are built from.
struct LeafGraph {
  std::vector<RegionStats> leaves;
  std::vector<LeafEdge> edges;
};

LeafGraph make_leaf_graph(const RegionPartition& partition, const Rag& rag, const Ucm& ucm);

/// Raw or normalized components of the merge dissimilarity.
struct PairComponents {
  double boundary = 0.0;
  double feature = 0.0;
  double centroid = 0.0;
};

double convex_dissimilarity(const PairComponents& normalized, const TreeWeights& weights);

/// Min-max scaling of the three dissimilarity components, fitted once on the leaf
/// adjacency and frozen for the rest of the agglomeration.
class Dissimilarity {
 public:
  explicit Dissimilarity(const LeafGraph& graph);

  static PairComponents raw(const RegionStats& a, const RegionStats& b, double boundary);
  PairComponents normalize(const PairComponents& raw) const;

  /// D* between two adjacent leaves. Throws ValidationError when they are not adjacent.
  double between_leaves(const LeafGraph& graph, int i, int j, const TreeWeights& weights) const;

 private:
  PairComponents lo_;
  PairComponents span_;
};

struct TreeNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  double height = 0.0;  // D* at which the node was formed; 0 for leaves
  RegionStats stats;
};

/// Binary merge dendrogram over leaf regions. Leaves are nodes 0..R-1; every internal
/// node has a larger id than its children, the root is the last node.
struct SegTree {
  int leaf_count = 0;
  std::vector<TreeNode> nodes;
  std::vector<LeafEdge> leaf_edges;
  IdMap leaf_map;  // empty when built from a bare LeafGraph

  int root() const { return static_cast<int>(nodes.size()) - 1; }
  bool is_leaf(int node) const { return node < leaf_count; }
  std::vector<int> leaves_under(int node) const;
};

SegTree build_tree(const LeafGraph& graph, const TreeWeights& weights);
SegTree build_tree(const RegionPartition& partition, const Rag& rag, const Ucm& ucm, const TreeWeights& weights);

/// Flat partition formed by the highest nodes whose height is <= level.
RegionPartition cut_at(const SegTree& tree, double level);

/// Binary shape, single root, monotone heights, area and likelihood conservation.
bool check_tree(const SegTree& tree, std::string* why = nullptr);

nlohmann::json tree_to_json(const SegTree& tree);

}  // namespace treecrf
