#pragma once

// Independent reference implementations and hand-rolled generators shared by the
// unit tests and the acceptance suite. Nothing here calls into the code under test
// except for plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "treecrf/energy.hpp"
#include "treecrf/hierarchy.hpp"
#include "treecrf/raster.hpp"

namespace oracle {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : e_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(e_() >> 11) * 0x1.0p-53);
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(e_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin(double p = 0.5) { return uniform() < p; }
  // Multiple of 1/16 in [lo, hi]: sums of these are exact in double precision.
  double dyadic(double lo, double hi) { return std::round(uniform(lo, hi) * 16.0) / 16.0; }

 private:
  std::mt19937_64 e_;
};

// ---------------------------------------------------------------------------
// Min-cut by exhaustive enumeration.

struct CutProblem {
  int n = 0;
  std::vector<double> source_cap, sink_cap;
  struct Arc {
    int from, to;
    double cap;
  };
  std::vector<Arc> arcs;
};

// side[i] == 1 means node i is on the sink side.
inline double cut_value(const CutProblem& p, const std::vector<int>& side) {
  double v = 0.0;
  for (int i = 0; i < p.n; ++i) v += side[i] ? p.source_cap[i] : p.sink_cap[i];
  for (const auto& a : p.arcs) {
    if (!side[a.from] && side[a.to]) v += a.cap;
  }
  return v;
}

inline double brute_min_cut(const CutProblem& p) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> side(p.n);
  for (std::uint32_t mask = 0; mask < (1u << p.n); ++mask) {
    for (int i = 0; i < p.n; ++i) side[i] = (mask >> i) & 1u;
    best = std::min(best, cut_value(p, side));
  }
  return best;
}

inline CutProblem random_cut_problem(Gen& g, int max_nodes) {
  CutProblem p;
  p.n = g.integer(1, max_nodes);
  for (int i = 0; i < p.n; ++i) {
    p.source_cap.push_back(g.coin(0.6) ? g.integer(0, 9) : 0);
    p.sink_cap.push_back(g.coin(0.6) ? g.integer(0, 9) : 0);
  }
  const int arcs = g.integer(0, 3 * p.n);
  for (int k = 0; k < arcs && p.n > 1; ++k) {
    const int a = g.integer(0, p.n - 1);
    int b = g.integer(0, p.n - 2);
    if (b >= a) ++b;
    p.arcs.push_back({a, b, static_cast<double>(g.integer(0, 9))});
  }
  return p;
}

// ---------------------------------------------------------------------------
// Pylon instances and exhaustive search over every feasible labelling.

struct PylonInstance {
  treecrf::Hierarchy hierarchy;
  treecrf::EnergyModel model;
};

// Random binary tree: repeatedly joins two random current roots, so parents get larger ids.
inline treecrf::Hierarchy random_binary_tree(Gen& g, int leaves) {
  treecrf::Hierarchy h;
  h.leaf_count = leaves;
  h.parent.assign(leaves, -1);
  std::vector<int> roots(leaves);
  for (int i = 0; i < leaves; ++i) roots[i] = i;
  while (roots.size() > 1) {
    const int a = g.integer(0, static_cast<int>(roots.size()) - 1);
    const int x = roots[a];
    roots.erase(roots.begin() + a);
    const int b = g.integer(0, static_cast<int>(roots.size()) - 1);
    const int y = roots[b];
    roots.erase(roots.begin() + b);
    const int id = h.node_count();
    h.parent.push_back(-1);
    h.parent[x] = id;
    h.parent[y] = id;
    roots.push_back(id);
  }
  return h;
}

// Connected random leaf adjacency: a random path plus extra pairs.
inline std::vector<std::pair<int, int>> random_leaf_edges(Gen& g, int leaves) {
  std::vector<int> order(leaves);
  for (int i = 0; i < leaves; ++i) order[i] = i;
  for (int i = leaves - 1; i > 0; --i) std::swap(order[i], order[g.integer(0, i)]);
  std::vector<std::pair<int, int>> edges;
  auto add = [&](int a, int b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    if (std::find(edges.begin(), edges.end(), std::pair{a, b}) == edges.end()) edges.emplace_back(a, b);
  };
  for (int i = 1; i < leaves; ++i) add(order[i - 1], order[i]);
  const int extra = g.integer(0, leaves);
  for (int k = 0; k < extra; ++k) add(g.integer(0, leaves - 1), g.integer(0, leaves - 1));
  return edges;
}

struct InstanceOptions {
  int classes = 2;
  double unary_lo = -1.0;
  double unary_hi = 3.0;
  double weight_hi = 2.0;
  bool potts = true;  // otherwise a random symmetric zero-diagonal mu in [0, 1]
  bool dyadic = true;
};

inline PylonInstance random_pylon_instance(Gen& g, int leaves, const InstanceOptions& o) {
  PylonInstance inst;
  inst.hierarchy = random_binary_tree(g, leaves);
  auto& m = inst.model;
  m.class_count = o.classes;
  m.node_count = inst.hierarchy.node_count();
  auto draw = [&](double lo, double hi) { return o.dyadic ? g.dyadic(lo, hi) : g.uniform(lo, hi); };
  for (int i = 0; i < m.node_count * o.classes; ++i) m.unary.push_back(draw(o.unary_lo, o.unary_hi));
  for (auto [a, b] : random_leaf_edges(g, leaves)) {
    treecrf::PairwiseTerm t;
    t.a = a;
    t.b = b;
    t.weighted = draw(0.0, o.weight_hi);
    m.pairwise.push_back(t);
  }
  m.mu.assign(static_cast<std::size_t>(o.classes) * o.classes, 0.0);
  for (int a = 0; a < o.classes; ++a) {
    for (int b = a + 1; b < o.classes; ++b) {
      const double v = o.potts ? 1.0 : draw(0.0, 1.0);
      m.mu[a * o.classes + b] = m.mu[b * o.classes + a] = v;
    }
  }
  return inst;
}

// Energy evaluated from scratch: the label of each leaf is found by walking to the root.
// Returns +infinity for infeasible labellings.
inline double energy(const treecrf::Hierarchy& h, const treecrf::EnergyModel& m, const std::vector<int>& label) {
  double e = 0.0;
  std::vector<int> leaf(h.leaf_count, -1);
  for (int l = 0; l < h.leaf_count; ++l) {
    int active = 0;
    for (int x = l; x >= 0; x = h.parent[x]) {
      if (label[x] >= 0) {
        ++active;
        leaf[l] = label[x];
      }
    }
    if (active != 1) return std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < h.node_count(); ++i) {
    if (label[i] >= 0) e += m.unary[static_cast<std::size_t>(i) * m.class_count + label[i]];
  }
  for (const auto& t : m.pairwise) e += m.mu[leaf[t.a] * m.class_count + leaf[t.b]] * t.weighted;
  return e;
}

// Visits every feasible labelling: each subtree is either covered by its root with one
// of `classes` labels or split between its children.
inline void for_each_feasible(const treecrf::Hierarchy& h, const std::vector<int>& classes,
                              const std::function<void(const std::vector<int>&)>& visit) {
  const auto kids = h.children();
  std::vector<int> label(h.node_count(), -1);
  std::vector<int> roots;
  for (int i = 0; i < h.node_count(); ++i) {
    if (h.parent[i] < 0) roots.push_back(i);
  }
  // Work list of subtrees still to be decided.
  std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& pending) {
    if (pending.empty()) {
      visit(label);
      return;
    }
    const int node = pending.back();
    pending.pop_back();
    for (int c : classes) {
      label[node] = c;
      rec(pending);
    }
    label[node] = -1;
    if (!kids[node].empty()) {
      for (int k : kids[node]) pending.push_back(k);
      rec(pending);
      for (std::size_t k = 0; k < kids[node].size(); ++k) pending.pop_back();
    }
    pending.push_back(node);
  };
  rec(roots);
}

inline double brute_force_minimum(const treecrf::Hierarchy& h, const treecrf::EnergyModel& m,
                                  const std::vector<int>& classes) {
  double best = std::numeric_limits<double>::infinity();
  for_each_feasible(h, classes, [&](const std::vector<int>& label) { best = std::min(best, energy(h, m, label)); });
  return best;
}

// ---------------------------------------------------------------------------
// Segmentation metrics by direct per-pixel counting.

struct NaiveMetrics {
  double oa = 0.0;
  double aa = 0.0;
  double mean_f1 = 0.0;
};

inline NaiveMetrics naive_metrics(const treecrf::LabelMap& gt, const treecrf::LabelMap& pred, int classes) {
  double correct = 0.0;
  double total = 0.0;
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    const int a = gt.labels()[p];
    const int b = pred.labels()[p];
    if (a == treecrf::kIgnore || b == treecrf::kIgnore) continue;
    total += 1;
    correct += a == b;
  }
  NaiveMetrics m;
  m.oa = correct / total;
  double recall_sum = 0.0;
  double f1_sum = 0.0;
  int counted = 0;
  for (int c = 0; c < classes; ++c) {
    double tp = 0.0, in_gt = 0.0, in_pred = 0.0;
    for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
      const int a = gt.labels()[p];
      const int b = pred.labels()[p];
      if (a == treecrf::kIgnore || b == treecrf::kIgnore) continue;
      tp += (a == c && b == c);
      in_gt += a == c;
      in_pred += b == c;
    }
    if (in_gt == 0) continue;
    const double rec = tp / in_gt;
    const double prec = in_pred > 0 ? tp / in_pred : 0.0;
    recall_sum += rec;
    f1_sum += (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    ++counted;
  }
  m.aa = recall_sum / counted;
  m.mean_f1 = f1_sum / counted;
  return m;
}

}  // namespace oracle
