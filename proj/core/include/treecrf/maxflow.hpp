#pragma once

#include <deque>
#include <vector>

namespace treecrf {

/// s-t max-flow by augmenting paths over two search trees (source and sink) that are
/// grown, augmented and repaired in place rather than rebuilt after every path.
/// Arc and node insertion order fixes the result, so cuts are reproducible.
class MaxFlowGraph {
 public:
  enum class Segment { kSource, kSink };

  explicit MaxFlowGraph(int node_count = 0);

  /// Appends `count` nodes and returns the id of the first.
  int add_nodes(int count);
  int node_count() const { return static_cast<int>(nodes_.size()); }

  /// Adds s->node with source_cap and node->t with sink_cap. Repeated calls accumulate.
  void add_terminal_weights(int node, double source_cap, double sink_cap);
  /// Adds from->to with `cap` and to->from with `reverse_cap`.
  void add_edge(int from, int to, double cap, double reverse_cap = 0.0);

  double solve();
  double flow() const { return flow_; }

  /// Side of the minimum cut. Nodes outside both search trees report kSource.
  Segment segment(int node) const;

 private:
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;

  struct Node {
    int first = -1;
    int parent = kNone;
    int timestamp = 0;
    int dist = 0;
    bool is_sink = false;
    bool active = false;
    double tr_cap = 0.0;  // > 0: residual from the source, < 0: residual to the sink
  };
  struct Arc {
    int head = 0;
    int next = -1;
    int sister = -1;
    double r_cap = 0.0;
  };

  void set_active(int i);
  int next_active();
  void augment(int middle);
  void adopt_source_orphan(int i);
  void adopt_sink_orphan(int i);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  double flow_ = 0.0;
  int time_ = 0;
};

}  // namespace treecrf
