#include "treecrf/energy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "treecrf/errors.hpp"

namespace treecrf {

std::vector<std::vector<int>> Hierarchy::children() const {
  std::vector<std::vector<int>> out(parent.size());
  for (int i = 0; i < node_count(); ++i) {
    if (parent[i] >= 0) out[parent[i]].push_back(i);
  }
  return out;
}

Hierarchy Hierarchy::flat(int leaf_count) {
  return Hierarchy{leaf_count, std::vector<int>(leaf_count, -1)};
}

Hierarchy Hierarchy::from_tree(const SegTree& tree) {
  Hierarchy h;
  h.leaf_count = tree.leaf_count;
  h.parent.reserve(tree.nodes.size());
  for (const auto& n : tree.nodes) h.parent.push_back(n.parent);
  return h;
}

bool check_feasible(const Hierarchy& h, const std::vector<int>& label, std::string* why) {
  if (static_cast<int>(label.size()) != h.node_count()) {
    if (why) *why = "labelling has " + std::to_string(label.size()) + " entries for " +
                    std::to_string(h.node_count()) + " nodes";
    return false;
  }
  for (int leaf = 0; leaf < h.leaf_count; ++leaf) {
    int active = 0;
    for (int x = leaf; x >= 0; x = h.parent[x]) active += label[x] != kInactive;
    if (active != 1) {
      if (why) {
        std::ostringstream os;
        os << (active == 0 ? "completeness" : "non-overlap") << " violated for leaf " << leaf << ": path";
        for (int x = leaf; x >= 0; x = h.parent[x]) {
          os << ' ' << x << (label[x] == kInactive ? "(-)" : "(" + std::to_string(label[x]) + ")");
        }
        os << " has " << active << " active nodes";
        *why = os.str();
      }
      return false;
    }
  }
  return true;
}

std::vector<int> leaf_labels(const Hierarchy& h, const std::vector<int>& label) {
  std::string why;
  if (!check_feasible(h, label, &why)) throw ValidationError("infeasible Pylon labelling: " + why);
  std::vector<int> out(h.leaf_count);
  for (int leaf = 0; leaf < h.leaf_count; ++leaf) {
    int x = leaf;
    while (label[x] == kInactive) x = h.parent[x];
    out[leaf] = label[x];
  }
  return out;
}

double unary_potential(double area, double likelihood, double gamma, double epsilon) {
  const double p = std::clamp(likelihood, epsilon, 1.0);
  return -(gamma * std::log(std::max(area, 1.0)) + std::log(p));
}

namespace {

void require_positive(double sigma, const char* name) {
  if (!(sigma > 0)) throw ValidationError(std::string(name) + " must be positive");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double robust_scale(const std::vector<double>& v) {
  const double med = median(v);
  if (med > 0) return med;
  double sum = 0.0;
  int count = 0;
  for (double x : v) {
    if (x > 0) {
      sum += x;
      ++count;
    }
  }
  return count > 0 ? sum / count : 1.0;
}

}  // namespace

double smoothness_potential(std::span<const double> a, std::span<const double> b, double sigma) {
  require_positive(sigma, "sigma_h");
  return std::exp(-squared_distance(a, b) / sigma);
}

double edge_potential(double ucm_score, double sigma) {
  require_positive(sigma, "sigma_g");
  return std::exp(-ucm_score / sigma);
}

double spatial_potential(double row_a, double col_a, double row_b, double col_b, double sigma) {
  require_positive(sigma, "sigma_c");
  const double d2 = (row_a - row_b) * (row_a - row_b) + (col_a - col_b) * (col_a - col_b);
  return std::exp(-d2 / sigma);
}

double elevation_potential(double elevation_a, double elevation_b, double sigma) {
  require_positive(sigma, "sigma_e");
  return std::exp(-std::abs(elevation_a - elevation_b) / sigma);
}

Sigmas median_sigmas(const LeafGraph& graph) {
  std::vector<double> h, g, c, e;
  for (const auto& edge : graph.edges) {
    const auto& a = graph.leaves[edge.a];
    const auto& b = graph.leaves[edge.b];
    h.push_back(squared_distance(a.feature, b.feature));
    g.push_back(edge.ucm);
    c.push_back((a.centroid_row - b.centroid_row) * (a.centroid_row - b.centroid_row) +
                (a.centroid_col - b.centroid_col) * (a.centroid_col - b.centroid_col));
    e.push_back(std::abs(a.elevation - b.elevation));
  }
  return {robust_scale(h), robust_scale(g), robust_scale(c), robust_scale(e)};
}

double pairwise_sum(const PairwiseTerm& t, const Lambdas& l) {
  return l.smoothness * t.smoothness + l.edge * t.edge + l.spatial * t.spatial + l.elevation * t.elevation;
}

void CoocCounts::add_pair(int a, int b) {
  at(a, b) += 1;
  at(b, a) += 1;
}

std::vector<std::uint8_t> leaf_majority_labels(const LabelMap& gt, const RegionPartition& leaves, int class_count) {
  if (gt.height() != leaves.height() || gt.width() != leaves.width()) {
    throw ValidationError("ground truth and partition shapes differ");
  }
  std::vector<std::uint32_t> votes(static_cast<std::size_t>(leaves.region_count) * class_count, 0);
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    const auto l = gt.labels()[p];
    if (l == kIgnore) continue;
    if (l >= class_count) throw ValidationError("ground truth label " + std::to_string(l) + " >= class count");
    ++votes[static_cast<std::size_t>(leaves.map.ids[p]) * class_count + l];
  }
  std::vector<std::uint8_t> out(leaves.region_count, kIgnore);
  for (int r = 0; r < leaves.region_count; ++r) {
    std::uint32_t best = 0;
    for (int c = 0; c < class_count; ++c) {
      const auto v = votes[static_cast<std::size_t>(r) * class_count + c];
      if (v > best) {
        best = v;
        out[r] = static_cast<std::uint8_t>(c);
      }
    }
  }
  return out;
}

void accumulate_cooccurrences(CoocCounts& counts, const LabelMap& gt, const RegionPartition& leaves) {
  const auto labels = leaf_majority_labels(gt, leaves, counts.class_count);
  const int w = leaves.width();
  std::map<std::pair<int, int>, char> seen;
  for (std::size_t p = 0; p < leaves.map.ids.size(); ++p) {
    const int r = static_cast<int>(p / w);
    const int c = static_cast<int>(p % w);
    auto visit = [&](std::size_t q) {
      int a = static_cast<int>(leaves.map.ids[p]);
      int b = static_cast<int>(leaves.map.ids[q]);
      if (a == b) return;
      if (a > b) std::swap(a, b);
      if (!seen.emplace(std::pair{a, b}, 1).second) return;
      if (labels[a] == kIgnore || labels[b] == kIgnore) return;
      counts.add_pair(labels[a], labels[b]);
    };
    if (c + 1 < w) visit(p + 1);
    if (r + 1 < leaves.height()) visit(p + w);
  }
}

std::vector<double> compatibility(const CoocCounts& counts, double mu_cap, std::vector<std::string>* warnings) {
  const int n = counts.class_count;
  std::vector<double> row_total(n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) row_total[a] += static_cast<double>(counts.at(a, b));
  }
  auto conditional = [&](int given, int other) {
    return row_total[given] > 0 ? static_cast<double>(counts.at(given, other)) / row_total[given] : 0.0;
  };
  std::vector<double> mu(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a) {
    if (row_total[a] == 0 && warnings) {
      warnings->push_back("class " + std::to_string(a) + " never adjacent to any labelled region; mu row set to cap");
    }
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const double freq = 0.5 * (conditional(a, b) + conditional(b, a));
      mu[static_cast<std::size_t>(a) * n + b] = freq > 0 ? std::clamp(-std::log(freq), 0.0, mu_cap) : mu_cap;
    }
  }
  return mu;
}

std::vector<double> potts_compatibility(int class_count) {
  std::vector<double> mu(static_cast<std::size_t>(class_count) * class_count, 1.0);
  for (int c = 0; c < class_count; ++c) mu[static_cast<std::size_t>(c) * class_count + c] = 0.0;
  return mu;
}

EnergyModel build_energy_model(const std::vector<RegionStats>& nodes, const LeafGraph& leaves,
                               const RunConfig& config, const Lambdas& lambdas, std::vector<double> mu) {
  EnergyModel m;
  m.node_count = static_cast<int>(nodes.size());
  m.class_count = nodes.empty() ? 0 : static_cast<int>(nodes.front().likelihood.size());
  if (config.class_count > 0 && config.class_count != m.class_count) {
    throw ValidationError("configured class_count " + std::to_string(config.class_count) +
                          " differs from likelihood channels " + std::to_string(m.class_count));
  }
  if (mu.size() != static_cast<std::size_t>(m.class_count) * m.class_count) {
    throw ValidationError("compatibility matrix is not C x C");
  }
  m.mu = std::move(mu);
  m.lambdas = lambdas;
  m.gamma = config.gamma;

  m.unary.resize(static_cast<std::size_t>(m.node_count) * m.class_count);
  for (int i = 0; i < m.node_count; ++i) {
    for (int c = 0; c < m.class_count; ++c) {
      m.unary[static_cast<std::size_t>(i) * m.class_count + c] =
          unary_potential(nodes[i].area, nodes[i].likelihood[c], config.gamma, config.epsilon_prob);
    }
  }

  m.sigmas = median_sigmas(leaves);
  m.pairwise.reserve(leaves.edges.size());
  for (const auto& e : leaves.edges) {
    const auto& a = leaves.leaves[e.a];
    const auto& b = leaves.leaves[e.b];
    PairwiseTerm t;
    t.a = e.a;
    t.b = e.b;
    t.smoothness = smoothness_potential(a.feature, b.feature, m.sigmas.smoothness);
    t.edge = edge_potential(e.ucm, m.sigmas.edge);
    t.spatial = spatial_potential(a.centroid_row, a.centroid_col, b.centroid_row, b.centroid_col, m.sigmas.spatial);
    t.elevation = elevation_potential(a.elevation, b.elevation, m.sigmas.elevation);
    t.weighted = pairwise_sum(t, lambdas);
    m.pairwise.push_back(t);
  }
  return m;
}

std::vector<RegionStats> node_stats(const SegTree& tree) {
  std::vector<RegionStats> out;
  out.reserve(tree.nodes.size());
  for (const auto& n : tree.nodes) out.push_back(n.stats);
  return out;
}

double total_energy(const Hierarchy& h, const EnergyModel& model, const std::vector<int>& label) {
  if (h.node_count() != model.node_count) throw ValidationError("hierarchy and energy model node counts differ");
  const auto leaf = leaf_labels(h, label);
  double e = 0.0;
  for (int i = 0; i < h.node_count(); ++i) {
    if (label[i] != kInactive) e += model.unary_at(i, label[i]);
  }
  for (const auto& t : model.pairwise) e += model.mu_at(leaf[t.a], leaf[t.b]) * t.weighted;
  return e;
}

}  // namespace treecrf
