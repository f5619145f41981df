#include "treecrf/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "treecrf/errors.hpp"

namespace treecrf {
namespace {
constexpr int kInfiniteDist = std::numeric_limits<int>::max();
}

MaxFlowGraph::MaxFlowGraph(int node_count) { add_nodes(node_count); }

int MaxFlowGraph::add_nodes(int count) {
  const int first = node_count();
  nodes_.resize(nodes_.size() + count);
  return first;
}

void MaxFlowGraph::add_terminal_weights(int node, double source_cap, double sink_cap) {
  if (source_cap < 0 || sink_cap < 0) throw ValidationError("max-flow: negative terminal capacity");
  auto& n = nodes_.at(node);
  const double delta = n.tr_cap;
  if (delta > 0) {
    source_cap += delta;
  } else {
    sink_cap -= delta;
  }
  flow_ += std::min(source_cap, sink_cap);
  n.tr_cap = source_cap - sink_cap;
}

void MaxFlowGraph::add_edge(int from, int to, double cap, double reverse_cap) {
  if (cap < 0 || reverse_cap < 0) throw ValidationError("max-flow: negative arc capacity");
  if (from == to) return;
  const int a = static_cast<int>(arcs_.size());
  arcs_.push_back(Arc{to, nodes_.at(from).first, a + 1, cap});
  arcs_.push_back(Arc{from, nodes_.at(to).first, a, reverse_cap});
  nodes_[from].first = a;
  nodes_[to].first = a + 1;
}

void MaxFlowGraph::set_active(int i) {
  if (!nodes_[i].active) {
    nodes_[i].active = true;
    active_.push_back(i);
  }
}

int MaxFlowGraph::next_active() {
  while (!active_.empty()) {
    const int i = active_.front();
    active_.pop_front();
    nodes_[i].active = false;
    if (nodes_[i].parent != kNone) return i;
  }
  return -1;
}

MaxFlowGraph::Segment MaxFlowGraph::segment(int node) const {
  const auto& n = nodes_.at(node);
  return (n.parent != kNone && n.is_sink) ? Segment::kSink : Segment::kSource;
}

void MaxFlowGraph::augment(int middle) {
  double bottleneck = arcs_[middle].r_cap;
  int i = arcs_[arcs_[middle].sister].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[arcs_[a].sister].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
  i = arcs_[middle].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[a].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

  arcs_[arcs_[middle].sister].r_cap += bottleneck;
  arcs_[middle].r_cap -= bottleneck;

  i = arcs_[arcs_[middle].sister].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    arcs_[a].r_cap += bottleneck;
    arcs_[arcs_[a].sister].r_cap -= bottleneck;
    if (arcs_[arcs_[a].sister].r_cap <= 0) {
      nodes_[i].parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap -= bottleneck;
  if (nodes_[i].tr_cap <= 0) {
    nodes_[i].parent = kOrphan;
    orphans_.push_front(i);
  }

  i = arcs_[middle].head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    arcs_[arcs_[a].sister].r_cap += bottleneck;
    arcs_[a].r_cap -= bottleneck;
    if (arcs_[a].r_cap <= 0) {
      nodes_[i].parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap += bottleneck;
  if (nodes_[i].tr_cap >= 0) {
    nodes_[i].parent = kOrphan;
    orphans_.push_front(i);
  }

  flow_ += bottleneck;
}

void MaxFlowGraph::adopt_source_orphan(int i) {
  int best_arc = kNone;
  int best_dist = kInfiniteDist;
  for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
    if (arcs_[arcs_[a0].sister].r_cap <= 0) continue;
    int j = arcs_[a0].head;
    if (nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
    // Distance from j to the source terminal, or infinite if j hangs off an orphan.
    int d = 0;
    for (;;) {
      if (nodes_[j].timestamp == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int a = nodes_[j].parent;
      ++d;
      if (a == kTerminal) {
        nodes_[j].timestamp = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInfiniteDist;
        break;
      }
      j = arcs_[a].head;
    }
    if (d < kInfiniteDist) {
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = arcs_[a0].head; nodes_[j].timestamp != time_; j = arcs_[nodes_[j].parent].head) {
        nodes_[j].timestamp = time_;
        nodes_[j].dist = d--;
      }
    }
  }

  nodes_[i].parent = best_arc;
  if (best_arc != kNone) {
    nodes_[i].timestamp = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }
  for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
    const int j = arcs_[a0].head;
    const int a = nodes_[j].parent;
    if (nodes_[j].is_sink || a == kNone) continue;
    if (arcs_[arcs_[a0].sister].r_cap > 0) set_active(j);
    if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
      nodes_[j].parent = kOrphan;
      orphans_.push_back(j);
    }
  }
}

void MaxFlowGraph::adopt_sink_orphan(int i) {
  int best_arc = kNone;
  int best_dist = kInfiniteDist;
  for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
    if (arcs_[a0].r_cap <= 0) continue;
    int j = arcs_[a0].head;
    if (!nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
    int d = 0;
    for (;;) {
      if (nodes_[j].timestamp == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int a = nodes_[j].parent;
      ++d;
      if (a == kTerminal) {
        nodes_[j].timestamp = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInfiniteDist;
        break;
      }
      j = arcs_[a].head;
    }
    if (d < kInfiniteDist) {
      if (d < best_dist) {
        best_arc = a0;
        best_dist = d;
      }
      for (j = arcs_[a0].head; nodes_[j].timestamp != time_; j = arcs_[nodes_[j].parent].head) {
        nodes_[j].timestamp = time_;
        nodes_[j].dist = d--;
      }
    }
  }

  nodes_[i].parent = best_arc;
  if (best_arc != kNone) {
    nodes_[i].timestamp = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }
  for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
    const int j = arcs_[a0].head;
    const int a = nodes_[j].parent;
    if (!nodes_[j].is_sink || a == kNone) continue;
    if (arcs_[a0].r_cap > 0) set_active(j);
    if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
      nodes_[j].parent = kOrphan;
      orphans_.push_back(j);
    }
  }
}

double MaxFlowGraph::solve() {
  active_.clear();
  orphans_.clear();
  time_ = 0;
  for (int i = 0; i < node_count(); ++i) {
    auto& n = nodes_[i];
    n.active = false;
    n.timestamp = 0;
    if (n.tr_cap > 0) {
      n.is_sink = false;
      n.parent = kTerminal;
      n.dist = 1;
      set_active(i);
    } else if (n.tr_cap < 0) {
      n.is_sink = true;
      n.parent = kTerminal;
      n.dist = 1;
      set_active(i);
    } else {
      n.parent = kNone;
    }
  }

  int current = -1;
  for (;;) {
    int i = (current >= 0 && nodes_[current].parent != kNone) ? current : next_active();
    if (i < 0) break;

    int middle = -1;
    if (!nodes_[i].is_sink) {
      for (int a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].r_cap <= 0) continue;
        const int j = arcs_[a].head;
        auto& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.is_sink = false;
          nj.parent = arcs_[a].sister;
          nj.timestamp = nodes_[i].timestamp;
          nj.dist = nodes_[i].dist + 1;
          set_active(j);
        } else if (nj.is_sink) {
          middle = a;
          break;
        } else if (nj.timestamp <= nodes_[i].timestamp && nj.dist > nodes_[i].dist) {
          nj.parent = arcs_[a].sister;
          nj.timestamp = nodes_[i].timestamp;
          nj.dist = nodes_[i].dist + 1;
        }
      }
    } else {
      for (int a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
        if (arcs_[arcs_[a].sister].r_cap <= 0) continue;
        const int j = arcs_[a].head;
        auto& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.is_sink = true;
          nj.parent = arcs_[a].sister;
          nj.timestamp = nodes_[i].timestamp;
          nj.dist = nodes_[i].dist + 1;
          set_active(j);
        } else if (!nj.is_sink) {
          middle = arcs_[a].sister;
          break;
        } else if (nj.timestamp <= nodes_[i].timestamp && nj.dist > nodes_[i].dist) {
          nj.parent = arcs_[a].sister;
          nj.timestamp = nodes_[i].timestamp;
          nj.dist = nodes_[i].dist + 1;
        }
      }
    }

    ++time_;
    if (middle >= 0) {
      current = i;
      augment(middle);
      while (!orphans_.empty()) {
        const int o = orphans_.front();
        orphans_.pop_front();
        if (nodes_[o].is_sink) {
          adopt_sink_orphan(o);
        } else {
          adopt_source_orphan(o);
        }
      }
    } else {
      current = -1;
    }
  }
  return flow_;
}

}  // namespace treecrf
