#pragma once

#include <string>
#include <vector>

namespace treecrf {

struct SegTree;

/// Forest over which the Pylon constraints are stated. Leaves are nodes 0..R-1 and
/// every parent id is larger than its children's ids, so ascending id order is a
/// bottom-up traversal. A flat CRF is the forest of R isolated leaves.
struct Hierarchy {
  int leaf_count = 0;
  std::vector<int> parent;  // -1 for roots

  int node_count() const { return static_cast<int>(parent.size()); }
  bool is_leaf(int node) const { return node < leaf_count; }
  std::vector<std::vector<int>> children() const;

  static Hierarchy flat(int leaf_count);
  static Hierarchy from_tree(const SegTree& tree);
};

inline constexpr int kInactive = -1;

/// Per-node class (0..C-1) or kInactive, and the energy it was reported with.
struct PylonSolution {
  std::vector<int> node_label;
  double energy = 0.0;
};

/// Every root-to-leaf path carries exactly one active node. Names the offending leaf
/// and path in `why` on failure.
bool check_feasible(const Hierarchy& hierarchy, const std::vector<int>& node_label, std::string* why = nullptr);

/// Label of each leaf inherited from its active ancestor. Throws ValidationError when infeasible.
std::vector<int> leaf_labels(const Hierarchy& hierarchy, const std::vector<int>& node_label);

}  // namespace treecrf
