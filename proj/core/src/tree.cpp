#include "treecrf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <tuple>

#include <nlohmann/json.hpp>

#include "treecrf/errors.hpp"

namespace treecrf {
namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

RegionStats merge_stats(const RegionStats& a, const RegionStats& b) {
  RegionStats m;
  m.area = a.area + b.area;
  const double wa = m.area > 0 ? a.area / m.area : 0.5;
  const double wb = 1.0 - wa;
  m.centroid_row = wa * a.centroid_row + wb * b.centroid_row;
  m.centroid_col = wa * a.centroid_col + wb * b.centroid_col;
  m.elevation = wa * a.elevation + wb * b.elevation;
  m.feature.resize(a.feature.size());
  for (std::size_t k = 0; k < a.feature.size(); ++k) m.feature[k] = wa * a.feature[k] + wb * b.feature[k];
  m.likelihood.resize(a.likelihood.size());
  for (std::size_t k = 0; k < a.likelihood.size(); ++k) {
    m.likelihood[k] = wa * a.likelihood[k] + wb * b.likelihood[k];
  }
  return m;
}

}  // namespace

LeafGraph make_leaf_graph(const RegionPartition& partition, const Rag& rag, const Ucm& ucm) {
  if (static_cast<int>(partition.stats.size()) != partition.region_count) {
    throw ValidationError("leaf graph: partition stats are missing");
  }
  LeafGraph g;
  g.leaves = partition.stats;
  g.edges.reserve(rag.edges.size());
  for (std::size_t e = 0; e < rag.edges.size(); ++e) {
    const auto& edge = rag.edges[e];
    g.edges.push_back(LeafEdge{edge.a, edge.b, ucm.edge_score.at(e),
                               static_cast<double>(std::max<std::size_t>(edge.boundary_pixels.size(), 1))});
  }
  return g;
}

double convex_dissimilarity(const PairComponents& n, const TreeWeights& w) {
  return w.boundary * n.boundary + w.feature * n.feature + w.centroid * n.centroid;
}

Dissimilarity::Dissimilarity(const LeafGraph& graph) {
  if (graph.edges.empty()) {
    span_ = {1.0, 1.0, 1.0};
    return;
  }
  PairComponents lo{INFINITY, INFINITY, INFINITY};
  PairComponents hi{-INFINITY, -INFINITY, -INFINITY};
  for (const auto& e : graph.edges) {
    const auto r = raw(graph.leaves[e.a], graph.leaves[e.b], e.ucm);
    lo = {std::min(lo.boundary, r.boundary), std::min(lo.feature, r.feature), std::min(lo.centroid, r.centroid)};
    hi = {std::max(hi.boundary, r.boundary), std::max(hi.feature, r.feature), std::max(hi.centroid, r.centroid)};
  }
  lo_ = lo;
  // A constant component contributes nothing: its span is left at 0 and normalizes to 0.
  span_ = {hi.boundary - lo.boundary, hi.feature - lo.feature, hi.centroid - lo.centroid};
}

PairComponents Dissimilarity::raw(const RegionStats& a, const RegionStats& b, double boundary) {
  return {boundary, euclidean(a.feature, b.feature),
          std::hypot(a.centroid_row - b.centroid_row, a.centroid_col - b.centroid_col)};
}

PairComponents Dissimilarity::normalize(const PairComponents& r) const {
  auto scale = [](double v, double lo, double span) { return span > 0 ? (v - lo) / span : 0.0; };
  return {scale(r.boundary, lo_.boundary, span_.boundary), scale(r.feature, lo_.feature, span_.feature),
          scale(r.centroid, lo_.centroid, span_.centroid)};
}

double Dissimilarity::between_leaves(const LeafGraph& graph, int i, int j, const TreeWeights& weights) const {
  for (const auto& e : graph.edges) {
    if ((e.a == i && e.b == j) || (e.a == j && e.b == i)) {
      return convex_dissimilarity(normalize(raw(graph.leaves[i], graph.leaves[j], e.ucm)), weights);
    }
  }
  throw ValidationError("pair_dissimilarity: regions " + std::to_string(i) + " and " + std::to_string(j) +
                        " are not adjacent");
}

std::vector<int> SegTree::leaves_under(int node) const {
  std::vector<int> out;
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    if (is_leaf(x)) {
      out.push_back(x);
    } else {
      stack.push_back(nodes[x].right);
      stack.push_back(nodes[x].left);
    }
  }
  return out;
}

SegTree build_tree(const LeafGraph& graph, const TreeWeights& weights) {
  const int r = static_cast<int>(graph.leaves.size());
  if (r == 0) throw ValidationError("build_tree: no leaves");
  const Dissimilarity dis(graph);

  SegTree tree;
  tree.leaf_count = r;
  tree.leaf_edges = graph.edges;
  tree.nodes.reserve(2 * r - 1);
  for (const auto& s : graph.leaves) tree.nodes.push_back(TreeNode{-1, -1, -1, 0.0, s});

  // Border between two current clusters: length-weighted UCM score.
  struct Border {
    double weighted = 0.0;
    double length = 0.0;
    double boundary() const { return weighted / length; }
  };
  std::vector<std::map<int, Border>> adj(2 * r - 1);
  for (const auto& e : graph.edges) {
    if (e.a == e.b) continue;
    for (auto [x, y] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
      adj[x][y].weighted += e.ucm * e.length;
      adj[x][y].length += e.length;
    }
  }

  auto score = [&](int x, int y) {
    const auto raw = Dissimilarity::raw(tree.nodes[x].stats, tree.nodes[y].stats, adj[x].at(y).boundary());
    return convex_dissimilarity(dis.normalize(raw), weights);
  };

  using Entry = std::tuple<double, int, int>;  // D*, smaller id, larger id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int x = 0; x < r; ++x) {
    for (const auto& [y, _] : adj[x]) {
      if (x < y) queue.emplace(score(x, y), x, y);
    }
  }

  std::vector<char> merged(2 * r - 1, 0);
  double last = 0.0;
  auto make_parent = [&](int x, int y, double h) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{-1, x, y, h, merge_stats(tree.nodes[x].stats, tree.nodes[y].stats)});
    tree.nodes[x].parent = id;
    tree.nodes[y].parent = id;
    merged[x] = merged[y] = 1;
    last = h;
    return id;
  };

  while (!queue.empty()) {
    const auto [d, x, y] = queue.top();
    queue.pop();
    // Stale entries refer to clusters that have since been merged away; node ids are never reused.
    if (merged[x] || merged[y]) continue;
    const int id = make_parent(x, y, std::max(d, last));
    for (int side : {x, y}) {
      for (const auto& [k, border] : adj[side]) {
        if (k == x || k == y) continue;
        auto& target = adj[id][k];
        target.weighted += border.weighted;
        target.length += border.length;
        adj[k].erase(side);
      }
      adj[side].clear();
    }
    for (const auto& [k, border] : adj[id]) {
      adj[k][id] = border;
      queue.emplace(score(std::min(id, k), std::max(id, k)), std::min(id, k), std::max(id, k));
    }
  }

  // Components that never touched are joined in id order above everything else.
  std::vector<int> roots;
  for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
    if (tree.nodes[i].parent < 0) roots.push_back(i);
  }
  while (roots.size() > 1) {
    const int id = make_parent(roots[0], roots[1], std::max(last, kDisconnectedUcmScore));
    roots.erase(roots.begin(), roots.begin() + 2);
    roots.insert(roots.begin(), id);
  }
  return tree;
}

SegTree build_tree(const RegionPartition& partition, const Rag& rag, const Ucm& ucm, const TreeWeights& weights) {
  auto tree = build_tree(make_leaf_graph(partition, rag, ucm), weights);
  tree.leaf_map = partition.map;
  return tree;
}

RegionPartition cut_at(const SegTree& tree, double level) {
  if (tree.leaf_map.ids.empty() && tree.leaf_count > 0) {
    throw ValidationError("cut_at: tree carries no leaf map");
  }
  std::vector<std::uint32_t> chosen(tree.leaf_count);
  for (int leaf = 0; leaf < tree.leaf_count; ++leaf) {
    int node = leaf;
    while (tree.nodes[node].parent >= 0 && tree.nodes[tree.nodes[node].parent].height <= level) {
      node = tree.nodes[node].parent;
    }
    chosen[leaf] = static_cast<std::uint32_t>(node);
  }
  IdMap map = tree.leaf_map;
  for (auto& id : map.ids) id = chosen[id];
  return partition_from_ids(map);
}

bool check_tree(const SegTree& tree, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  const int n = static_cast<int>(tree.nodes.size());
  if (n != 2 * tree.leaf_count - 1) return fail("node count is not 2R-1");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& node = tree.nodes[i];
    if (node.parent < 0) {
      ++roots;
    } else if (node.parent <= i || node.parent >= n) {
      return fail("node " + std::to_string(i) + " has a parent id not above its own");
    } else {
      const auto& p = tree.nodes[node.parent];
      if (p.left != i && p.right != i) return fail("node " + std::to_string(i) + " missing from its parent");
      if (p.height < node.height) return fail("height decreases at node " + std::to_string(node.parent));
    }
    if (tree.is_leaf(i)) {
      if (node.left >= 0 || node.right >= 0) return fail("leaf " + std::to_string(i) + " has children");
      continue;
    }
    if (node.left < 0 || node.right < 0) return fail("internal node " + std::to_string(i) + " is not binary");
    const auto& l = tree.nodes[node.left].stats;
    const auto& r = tree.nodes[node.right].stats;
    if (std::abs(l.area + r.area - node.stats.area) > 1e-9 * std::max(1.0, node.stats.area)) {
      return fail("area not conserved at node " + std::to_string(i));
    }
    for (std::size_t k = 0; k < node.stats.likelihood.size(); ++k) {
      const double expect = (l.area * l.likelihood[k] + r.area * r.likelihood[k]) / node.stats.area;
      if (std::abs(expect - node.stats.likelihood[k]) > 1e-9) {
        return fail("likelihood is not the area-weighted child mean at node " + std::to_string(i));
      }
    }
  }
  if (roots != 1) return fail(std::to_string(roots) + " roots");
  return true;
}

nlohmann::json tree_to_json(const SegTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
    const auto& n = tree.nodes[i];
    nlohmann::json j = {{"id", i},
                        {"parent", n.parent},
                        {"height", n.height},
                        {"area", n.stats.area},
                        {"centroid", {n.stats.centroid_row, n.stats.centroid_col}}};
    if (!tree.is_leaf(i)) j["children"] = {n.left, n.right};
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : tree.leaf_edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"ucm", e.ucm}});
  return {{"leaf_count", tree.leaf_count}, {"root", tree.root()}, {"nodes", nodes}, {"leaf_edges", edges}};
}

}  // namespace treecrf
