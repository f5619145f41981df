#include "treecrf/regions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "treecrf/errors.hpp"
#include "treecrf/tensor_io.hpp"

namespace treecrf {
namespace {

constexpr std::uint32_t kUnset = 0xffffffffu;

// 4-neighbours in a fixed order: up, left, right, down.
template <typename F>
void for_each_neighbor(int height, int width, std::size_t p, F&& f) {
  const int r = static_cast<int>(p / width);
  const int c = static_cast<int>(p % width);
  if (r > 0) f(p - width);
  if (c > 0) f(p - 1);
  if (c + 1 < width) f(p + 1);
  if (r + 1 < height) f(p + width);
}

// Relabels ids densely in order of first appearance in raster-scan order.
int densify(std::vector<std::uint32_t>& ids) {
  std::map<std::uint32_t, std::uint32_t> remap;
  for (auto& id : ids) {
    auto [it, inserted] = remap.try_emplace(id, static_cast<std::uint32_t>(remap.size()));
    id = it->second;
  }
  return static_cast<int>(remap.size());
}

struct BorderAcc {
  double sum = 0.0;
  double count = 0.0;
  double mean() const { return count > 0 ? sum / count : 0.0; }
};

// Absorbs regions below min_area into the neighbour with the weakest shared border.
// Border strength is the mean landscape value over adjacent pixel pairs.
void absorb_small_regions(std::vector<std::uint32_t>& ids, int region_count, const Raster& g, int min_area) {
  const int h = g.height();
  const int w = g.width();
  std::vector<double> area(region_count, 0.0);
  std::vector<std::map<int, BorderAcc>> adj(region_count);
  for (std::size_t p = 0; p < ids.size(); ++p) {
    area[ids[p]] += 1.0;
    const int r = static_cast<int>(p / w);
    const int c = static_cast<int>(p % w);
    auto link = [&](std::size_t q) {
      const int a = static_cast<int>(ids[p]);
      const int b = static_cast<int>(ids[q]);
      if (a == b) return;
      const double v = 0.5 * (g.values()[p] + g.values()[q]);
      adj[a][b].sum += v;
      adj[a][b].count += 1.0;
      adj[b][a].sum += v;
      adj[b][a].count += 1.0;
    };
    if (c + 1 < w) link(p + 1);
    if (r + 1 < h) link(p + w);
  }

  std::vector<int> owner(region_count);
  std::iota(owner.begin(), owner.end(), 0);
  std::set<std::pair<double, int>> small;
  for (int r = 0; r < region_count; ++r) {
    if (area[r] < min_area) small.emplace(area[r], r);
  }
  int alive = region_count;
  while (!small.empty() && alive > 1) {
    const int a = small.begin()->second;
    small.erase(small.begin());
    if (adj[a].empty()) continue;
    int target = -1;
    double best = 0.0;
    for (const auto& [k, acc] : adj[a]) {
      if (target < 0 || acc.mean() < best) {
        target = k;
        best = acc.mean();
      }
    }
    if (area[target] < min_area) small.erase({area[target], target});
    for (const auto& [k, acc] : adj[a]) {
      if (k == target) continue;
      adj[target][k].sum += acc.sum;
      adj[target][k].count += acc.count;
      adj[k][target].sum += acc.sum;
      adj[k][target].count += acc.count;
      adj[k].erase(a);
    }
    adj[target].erase(a);
    adj[a].clear();
    area[target] += area[a];
    area[a] = 0.0;
    owner[a] = target;
    --alive;
    if (area[target] < min_area) small.emplace(area[target], target);
  }

  auto resolve = [&](int r) {
    while (owner[r] != r) r = owner[r];
    return r;
  };
  for (auto& id : ids) id = static_cast<std::uint32_t>(resolve(static_cast<int>(id)));
}

}  // namespace

Raster fuse_boundaries(const Raster& boundary) {
  if (boundary.channels() < 1) throw ValidationError("fuse_boundaries: boundary raster has no channels");
  if (!boundary.all_finite() || !boundary.within_unit_interval()) {
    throw ValidationError("fuse_boundaries: boundary probabilities must lie in [0, 1]");
  }
  Raster g(boundary.height(), boundary.width(), 1);
  for (std::size_t p = 0; p < boundary.pixel_count(); ++p) {
    const auto px = boundary.pixel(p);
    g.values()[p] = *std::max_element(px.begin(), px.end());
  }
  return g;
}

RegionPartition watershed(const Raster& landscape, const RunConfig& config) {
  if (landscape.channels() != 1) throw ValidationError("watershed: landscape must be single-channel");
  if (!landscape.all_finite()) throw ValidationError("watershed: landscape contains non-finite values");
  const int h = landscape.height();
  const int w = landscape.width();
  const std::size_t n = landscape.pixel_count();
  const auto& g = landscape.values();

  // Regional minima: 4-connected plateaus without a strictly lower neighbour.
  std::vector<std::uint32_t> plateau(n, kUnset);
  std::vector<std::uint32_t> label(n, kUnset);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> members;
  std::uint32_t seeds = 0;
  using Entry = std::tuple<float, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::uint64_t seq = 0;

  for (std::size_t start = 0; start < n; ++start) {
    if (plateau[start] != kUnset) continue;
    const float v = g[start];
    bool is_minimum = true;
    members.clear();
    stack.assign(1, start);
    plateau[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      members.push_back(p);
      for_each_neighbor(h, w, p, [&](std::size_t q) {
        if (g[q] < v) is_minimum = false;
        if (g[q] == v && plateau[q] == kUnset) {
          plateau[q] = 1;
          stack.push_back(q);
        }
      });
    }
    if (!is_minimum) continue;
    std::sort(members.begin(), members.end());
    for (std::size_t p : members) {
      label[p] = seeds;
      queue.emplace(v, seq++, p);
    }
    ++seeds;
  }

  // Flooding. Ties are broken by insertion order, which makes plateau handling pure.
  while (!queue.empty()) {
    const auto [level, order, p] = queue.top();
    queue.pop();
    for_each_neighbor(h, w, p, [&](std::size_t q) {
      if (label[q] != kUnset) return;
      label[q] = label[p];
      queue.emplace(std::max(level, g[q]), seq++, q);
    });
  }

  int count = densify(label);
  if (config.min_region_px > 1 && count > 1) {
    absorb_small_regions(label, count, landscape, config.min_region_px);
    count = densify(label);
  }

  RegionPartition part;
  part.map = IdMap{h, w, std::move(label)};
  part.region_count = count;
  compute_region_stats(part, {});
  return part;
}

RegionPartition partition_from_ids(const IdMap& ids) {
  if (ids.ids.size() != static_cast<std::size_t>(ids.height) * ids.width) {
    throw ValidationError("partition: id map size does not match height*width");
  }
  RegionPartition part;
  part.map = ids;
  part.region_count = densify(part.map.ids);
  compute_region_stats(part, {});
  return part;
}

void compute_region_stats(RegionPartition& part, const RegionInputs& in) {
  const int h = part.height();
  const int w = part.width();
  auto check = [&](const Raster* r, const char* what) {
    if (r && (r->height() != h || r->width() != w)) {
      throw ValidationError(std::string("region stats: ") + what + " raster shape differs from partition");
    }
  };
  check(in.likelihoods, "likelihood");
  check(in.features, "feature");
  check(in.elevation, "elevation");

  const int fdim = in.features ? in.features->channels() : 0;
  const int cdim = in.likelihoods ? in.likelihoods->channels() : 0;
  part.stats.assign(part.region_count, RegionStats{});
  for (auto& s : part.stats) {
    s.feature.assign(fdim, 0.0);
    s.likelihood.assign(cdim, 0.0);
  }
  for (std::size_t p = 0; p < part.map.ids.size(); ++p) {
    auto& s = part.stats[part.map.ids[p]];
    s.area += 1.0;
    s.centroid_row += static_cast<double>(p / w);
    s.centroid_col += static_cast<double>(p % w);
    if (in.elevation) s.elevation += in.elevation->values()[p * in.elevation->channels()];
    for (int k = 0; k < fdim; ++k) s.feature[k] += in.features->pixel(p)[k];
    for (int k = 0; k < cdim; ++k) s.likelihood[k] += in.likelihoods->pixel(p)[k];
  }
  for (auto& s : part.stats) {
    if (s.area <= 0) continue;
    s.centroid_row /= s.area;
    s.centroid_col /= s.area;
    s.elevation /= s.area;
    for (auto& v : s.feature) v /= s.area;
    for (auto& v : s.likelihood) v /= s.area;
  }
}

bool check_partition(const RegionPartition& part, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  const int h = part.height();
  const int w = part.width();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (part.map.ids.size() != n) return fail("id map size differs from height*width");
  std::vector<std::size_t> area(part.region_count, 0);
  std::vector<std::size_t> first(part.region_count, n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto id = part.map.ids[p];
    if (id >= static_cast<std::uint32_t>(part.region_count)) {
      return fail("pixel " + std::to_string(p) + " has id outside 0..R-1");
    }
    if (area[id]++ == 0) first[id] = p;
  }
  std::size_t total = 0;
  for (int r = 0; r < part.region_count; ++r) {
    if (area[r] == 0) return fail("region " + std::to_string(r) + " is empty (ids not dense)");
    total += area[r];
  }
  if (total != n) return fail("region areas do not sum to H*W");

  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack;
  for (int r = 0; r < part.region_count; ++r) {
    std::size_t reached = 0;
    stack.assign(1, first[r]);
    seen[first[r]] = 1;
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      ++reached;
      for_each_neighbor(h, w, p, [&](std::size_t q) {
        if (!seen[q] && part.map.ids[q] == static_cast<std::uint32_t>(r)) {
          seen[q] = 1;
          stack.push_back(q);
        }
      });
    }
    if (reached != area[r]) return fail("region " + std::to_string(r) + " is not 4-connected");
  }
  if (!part.stats.empty()) {
    for (int r = 0; r < part.region_count; ++r) {
      if (part.stats[r].area != static_cast<double>(area[r])) {
        return fail("region " + std::to_string(r) + " stats area differs from pixel count");
      }
    }
  }
  return true;
}

int Rag::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b}, [](const RagEdge& e, const auto& key) {
    return std::pair{e.a, e.b} < key;
  });
  if (it != edges.end() && it->a == a && it->b == b) return static_cast<int>(it - edges.begin());
  return -1;
}

std::vector<std::vector<int>> Rag::adjacency() const {
  std::vector<std::vector<int>> adj(region_count);
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

Rag build_rag(const RegionPartition& part, const Raster& landscape) {
  if (landscape.height() != part.height() || landscape.width() != part.width() || landscape.channels() != 1) {
    throw ValidationError("build_rag: landscape must be single-channel and match the partition shape");
  }
  const int h = part.height();
  const int w = part.width();
  std::map<std::pair<int, int>, std::vector<std::uint32_t>> borders;
  for (std::size_t p = 0; p < part.map.ids.size(); ++p) {
    const int r = static_cast<int>(p / w);
    const int c = static_cast<int>(p % w);
    auto link = [&](std::size_t q) {
      int a = static_cast<int>(part.map.ids[p]);
      int b = static_cast<int>(part.map.ids[q]);
      if (a == b) return;
      if (a > b) std::swap(a, b);
      auto& px = borders[{a, b}];
      px.push_back(static_cast<std::uint32_t>(p));
      px.push_back(static_cast<std::uint32_t>(q));
    };
    if (c + 1 < w) link(p + 1);
    if (r + 1 < h) link(p + w);
  }
  Rag rag;
  rag.region_count = part.region_count;
  rag.edges.reserve(borders.size());
  for (auto& [key, px] : borders) {
    std::sort(px.begin(), px.end());
    px.erase(std::unique(px.begin(), px.end()), px.end());
    double sum = 0.0;
    for (auto p : px) sum += landscape.values()[p];
    rag.edges.push_back(RagEdge{key.first, key.second, std::move(px), 0.0});
    rag.edges.back().strength = sum / static_cast<double>(rag.edges.back().boundary_pixels.size());
  }
  return rag;
}

double Ucm::merge_height(int a, int b) const {
  if (a == b) return 0.0;
  std::vector<char> on_path(parent.size(), 0);
  for (int x = a; x >= 0; x = parent[x]) on_path[x] = 1;
  for (int x = b; x >= 0; x = parent[x]) {
    if (on_path[x]) return height[x];
  }
  return kDisconnectedUcmScore;
}

Ucm build_ucm(const Rag& rag) {
  const int n = rag.region_count;
  Ucm ucm;
  ucm.region_count = n;
  ucm.edge_score.assign(rag.edges.size(), 0.0);
  ucm.parent.assign(n, -1);
  ucm.height.assign(n, 0.0);

  // Cluster-level borders: length-weighted strength plus the original edges they contain.
  struct Border {
    double weighted = 0.0;
    double length = 0.0;
    std::vector<int> edges;
    double strength() const { return weighted / length; }
  };
  std::vector<std::map<int, Border>> adj(n);
  for (int e = 0; e < static_cast<int>(rag.edges.size()); ++e) {
    const auto& edge = rag.edges[e];
    const double len = static_cast<double>(std::max<std::size_t>(edge.boundary_pixels.size(), 1));
    for (auto [x, y] : {std::pair{edge.a, edge.b}, std::pair{edge.b, edge.a}}) {
      auto& b = adj[x][y];
      b.weighted += edge.strength * len;
      b.length += len;
      b.edges.push_back(e);
    }
  }

  // cluster id -> dendrogram node id
  std::vector<int> node_of(n);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<int> version(n, 0);
  using Entry = std::tuple<double, int, int, int, int>;  // strength, a, b, version a, version b
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int a = 0; a < n; ++a) {
    for (const auto& [b, border] : adj[a]) {
      if (a < b) queue.emplace(border.strength(), a, b, 0, 0);
    }
  }

  double last = 0.0;
  std::vector<char> alive(n, 1);
  while (!queue.empty()) {
    const auto [strength, a, b, va, vb] = queue.top();
    queue.pop();
    if (!alive[a] || !alive[b] || version[a] != va || version[b] != vb) continue;
    const double h = std::max(strength, last);
    last = h;
    for (int e : adj[a][b].edges) ucm.edge_score[e] = h;

    // Cluster b folds into a.
    const int merged = static_cast<int>(ucm.parent.size());
    ucm.parent.push_back(-1);
    ucm.height.push_back(h);
    ucm.parent[node_of[a]] = merged;
    ucm.parent[node_of[b]] = merged;
    node_of[a] = merged;
    adj[a].erase(b);
    adj[b].erase(a);
    for (auto& [k, border] : adj[b]) {
      auto& target = adj[a][k];
      target.weighted += border.weighted;
      target.length += border.length;
      target.edges.insert(target.edges.end(), border.edges.begin(), border.edges.end());
      auto& back = adj[k][a];
      back = target;
      adj[k].erase(b);
    }
    adj[b].clear();
    alive[b] = 0;
    ++version[a];
    for (auto& [k, border] : adj[a]) {
      ++version[k];
    }
    // Every border touching a changed its version stamp; re-queue all of a's and its neighbours'.
    for (const auto& [k, border] : adj[a]) {
      for (const auto& [m, kb] : adj[k]) {
        const int x = std::min(k, m);
        const int y = std::max(k, m);
        queue.emplace(kb.strength(), x, y, version[x], version[y]);
      }
    }
  }

  // Disconnected components hang under one root at the documented cross-component score.
  std::vector<int> roots;
  for (int node = 0; node < static_cast<int>(ucm.parent.size()); ++node) {
    if (ucm.parent[node] < 0) roots.push_back(node);
  }
  if (roots.size() > 1) {
    const int top = static_cast<int>(ucm.parent.size());
    ucm.parent.push_back(-1);
    ucm.height.push_back(std::max(last, kDisconnectedUcmScore));
    for (int r : roots) ucm.parent[r] = top;
  }
  return ucm;
}

nlohmann::json region_stats_json(const RegionPartition& part) {
  nlohmann::json regions = nlohmann::json::array();
  for (int r = 0; r < part.region_count; ++r) {
    const auto& s = part.stats[r];
    regions.push_back({{"id", r},
                       {"area", s.area},
                       {"centroid", {s.centroid_row, s.centroid_col}},
                       {"elevation", s.elevation},
                       {"feature", s.feature},
                       {"likelihood", s.likelihood}});
  }
  return {{"height", part.height()}, {"width", part.width()}, {"region_count", part.region_count},
          {"regions", regions}};
}

void write_partition(const RegionPartition& part, const std::filesystem::path& stem) {
  auto ids_path = stem;
  ids_path += ".ftn";
  auto json_path = stem;
  json_path += ".json";
  write_tensor(part.map, ids_path);
  std::ofstream out(json_path);
  if (!out) throw IoError("cannot open " + json_path.string() + " for writing");
  out << region_stats_json(part).dump(1) << '\n';
  if (!out) throw IoError("write failure on " + json_path.string());
}

RegionPartition read_partition(const std::filesystem::path& ids_path) {
  return partition_from_ids(read_ids(ids_path));
}

}  // namespace treecrf
