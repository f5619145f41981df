#include "treecrf/pylon.hpp"

#include <cmath>
#include <limits>

#include "treecrf/errors.hpp"
#include "treecrf/qpbo.hpp"

namespace treecrf {
namespace {

constexpr int kMixed = -2;

// Boolean encoding of a labelling for one move. Leaf l owns variable l, shared by both
// indicators. Internal node i owns a "foreground" indicator F (some alpha-active node at
// or above i) and a "background" indicator G (no beta-active node at or above i).
struct MoveVars {
  int leaf_count;
  int f(int node) const { return node < leaf_count ? node : leaf_count + 2 * (node - leaf_count); }
  int g(int node) const { return node < leaf_count ? node : leaf_count + 2 * (node - leaf_count) + 1; }
  int count(int nodes) const { return leaf_count + 2 * (nodes - leaf_count); }
};

std::vector<int> encode(const Hierarchy& h, const std::vector<int>& label, int alpha) {
  const MoveVars v{h.leaf_count};
  std::vector<int> x(v.count(h.node_count()), 0);
  std::vector<char> under_alpha(h.node_count(), 0);
  std::vector<char> under_other(h.node_count(), 0);
  for (int i = h.node_count() - 1; i >= 0; --i) {
    const int p = h.parent[i];
    under_alpha[i] = (p >= 0 && under_alpha[p]) || label[i] == alpha;
    under_other[i] = (p >= 0 && under_other[p]) || (label[i] != kInactive && label[i] != alpha);
    if (h.is_leaf(i)) {
      x[v.f(i)] = under_alpha[i] ? 1 : 0;
    } else {
      x[v.f(i)] = under_alpha[i] ? 1 : 0;
      x[v.g(i)] = under_other[i] ? 0 : 1;
    }
  }
  return x;
}

// Solves one move: every node may become alpha-active or, when beta[i] != kInactive,
// active with beta[i]. Variables QPBO leaves open keep the incumbent's encoding.
std::vector<int> solve_move(const Hierarchy& h, const EnergyModel& m, int alpha, const std::vector<int>& beta,
                            const std::vector<int>& incumbent, int* unlabeled) {
  const MoveVars v{h.leaf_count};
  const int n = h.node_count();
  Qpbo q(v.count(n));
  for (int i = 0; i < n; ++i) {
    const int p = h.parent[i];
    const double ua = m.unary_at(i, alpha);
    q.add_unary(v.f(i), 0.0, ua);
    if (p >= 0) {
      q.add_unary(v.f(p), 0.0, -ua);
      q.add_implication(v.f(p), v.f(i));
      q.add_implication(v.g(i), v.g(p));
    }
    if (beta[i] != kInactive) {
      const double ub = m.unary_at(i, beta[i]);
      q.add_unary(v.g(i), 0.0, -ub);
      if (p >= 0) q.add_unary(v.g(p), 0.0, ub);
    } else if (p >= 0) {
      q.add_implication(v.g(p), v.g(i));
    } else {
      q.fix(v.g(i), 1);
    }
  }
  for (const auto& t : m.pairwise) {
    if (t.weighted == 0.0) continue;
    const int ba = beta[t.a];
    const int bb = beta[t.b];
    q.add_pairwise(t.a, t.b, m.mu_at(ba, bb) * t.weighted, m.mu_at(ba, alpha) * t.weighted,
                   m.mu_at(alpha, bb) * t.weighted, m.mu_at(alpha, alpha) * t.weighted);
  }

  auto x = q.solve();
  const auto fallback = encode(h, incumbent, alpha);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == Qpbo::kUnlabeled) {
      x[k] = fallback[k];
      if (unlabeled) ++*unlabeled;
    }
  }

  std::vector<int> label(n, kInactive);
  for (int i = 0; i < n; ++i) {
    const int p = h.parent[i];
    const int f_above = p >= 0 ? x[v.f(p)] : 0;
    const int g_above = p >= 0 ? x[v.g(p)] : 1;
    if (x[v.f(i)] == 1 && f_above == 0) {
      label[i] = alpha;
    } else if (x[v.g(i)] == 0 && g_above == 1) {
      label[i] = beta[i];
    }
  }
  return label;
}

// Beta of a move: a leaf keeps its current class unless that class is alpha, in which
// case it takes its cheapest other class; an internal node may only turn beta when all
// of its leaves agree on one.
std::vector<int> move_betas(const Hierarchy& h, const EnergyModel& m, int alpha, const std::vector<int>& leaf) {
  std::vector<int> beta(h.node_count(), kInactive);
  for (int l = 0; l < h.leaf_count; ++l) {
    if (leaf[l] != alpha) {
      beta[l] = leaf[l];
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < m.class_count; ++c) {
      if (c != alpha && m.unary_at(l, c) < best) {
        best = m.unary_at(l, c);
        beta[l] = c;
      }
    }
  }
  std::vector<int> common(h.node_count(), kInactive);
  for (int l = 0; l < h.leaf_count; ++l) common[l] = beta[l];
  std::vector<char> seen(h.node_count(), 0);
  for (int i = 0; i < h.node_count(); ++i) {
    if (!h.is_leaf(i)) beta[i] = common[i];
    const int p = h.parent[i];
    if (p < 0) continue;
    if (!seen[p]) {
      common[p] = common[i];
      seen[p] = 1;
    } else if (common[p] != common[i]) {
      common[p] = kInactive;
    }
  }
  return beta;
}

void require_model(const Hierarchy& h, const EnergyModel& m) {
  if (h.node_count() != m.node_count) throw ValidationError("hierarchy and energy model node counts differ");
  for (const auto& t : m.pairwise) {
    if (t.a < 0 || t.b < 0 || t.a >= h.leaf_count || t.b >= h.leaf_count) {
      throw ValidationError("pairwise term refers to a non-leaf node");
    }
  }
}

}  // namespace

std::vector<int> unary_leaf_labelling(const Hierarchy& h, const EnergyModel& m) {
  require_model(h, m);
  std::vector<int> label(h.node_count(), kInactive);
  for (int l = 0; l < h.leaf_count; ++l) {
    int best = 0;
    for (int c = 1; c < m.class_count; ++c) {
      if (m.unary_at(l, c) < m.unary_at(l, best)) best = c;
    }
    label[l] = best;
  }
  return label;
}

void promote_uniform_subtrees(const Hierarchy& h, const EnergyModel& m, std::vector<int>& label) {
  const int n = h.node_count();
  // Bottom-up: the single class of the active nodes below each node (or kMixed) and their unary sum.
  std::vector<int> uniform(n, kInactive);
  std::vector<double> cost(n, 0.0);
  std::vector<char> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    if (label[i] != kInactive) {
      uniform[i] = label[i];
      cost[i] = m.unary_at(i, label[i]);
    }
    const int p = h.parent[i];
    if (p < 0 || label[p] != kInactive) continue;
    if (!seen[p]) {
      uniform[p] = uniform[i];
      seen[p] = 1;
    } else if (uniform[p] != uniform[i]) {
      uniform[p] = kMixed;
    }
    cost[p] += cost[i];
  }
  // Top-down: promote the highest qualifying node of each uncovered subtree.
  std::vector<char> covered(n, 0);
  for (int i = n - 1; i >= 0; --i) {
    const int p = h.parent[i];
    if (p >= 0 && covered[p]) {
      label[i] = kInactive;
      covered[i] = 1;
      continue;
    }
    if (label[i] == kInactive && uniform[i] >= 0 && m.unary_at(i, uniform[i]) <= cost[i]) label[i] = uniform[i];
    covered[i] = label[i] != kInactive;
  }
}

PylonSolution binary_pylon(const Hierarchy& h, const EnergyModel& m, int foreground, int background) {
  require_model(h, m);
  if (foreground == background || foreground < 0 || background < 0 || foreground >= m.class_count ||
      background >= m.class_count) {
    throw ValidationError("binary_pylon: need two distinct classes");
  }
  std::vector<int> incumbent(h.node_count(), kInactive);
  for (int l = 0; l < h.leaf_count; ++l) {
    incumbent[l] = m.unary_at(l, foreground) < m.unary_at(l, background) ? foreground : background;
  }
  const std::vector<int> beta(h.node_count(), background);
  PylonSolution s;
  s.node_label = solve_move(h, m, foreground, beta, incumbent, nullptr);
  if (!check_feasible(h, s.node_label)) s.node_label = incumbent;
  promote_uniform_subtrees(h, m, s.node_label);
  s.energy = total_energy(h, m, s.node_label);
  return s;
}

PylonSolution alpha_expansion(const Hierarchy& h, const EnergyModel& m, std::vector<int> init, ExpansionStats* stats,
                              int max_cycles) {
  require_model(h, m);
  std::string why;
  if (!check_feasible(h, init, &why)) throw ValidationError("alpha_expansion: infeasible initial labelling: " + why);
  ExpansionStats local;
  ExpansionStats& st = stats ? *stats : local;
  st = ExpansionStats{};

  std::vector<int> current = std::move(init);
  double energy = total_energy(h, m, current);
  st.energy_trace.push_back(energy);

  for (int cycle = 0; cycle < max_cycles && !st.converged; ++cycle) {
    ++st.cycles;
    bool changed = false;
    for (int alpha = 0; alpha < m.class_count; ++alpha) {
      const auto beta = move_betas(h, m, alpha, leaf_labels(h, current));
      auto proposal = solve_move(h, m, alpha, beta, current, &st.unlabeled_variables);
      if (!check_feasible(h, proposal, &why)) {
        st.warnings.push_back("move alpha=" + std::to_string(alpha) + " produced an infeasible labelling: " + why);
        continue;
      }
      const double e = total_energy(h, m, proposal);
      if (e < energy - 1e-12 * std::max(1.0, std::abs(energy))) {
        current = std::move(proposal);
        energy = e;
        st.energy_trace.push_back(energy);
        ++st.committed_moves;
        changed = true;
      }
    }
    st.converged = !changed;
  }
  if (!st.converged) {
    st.warnings.push_back("alpha-expansion stopped after " + std::to_string(max_cycles) + " cycles without converging");
  }

  promote_uniform_subtrees(h, m, current);
  PylonSolution s;
  s.node_label = std::move(current);
  s.energy = total_energy(h, m, s.node_label);
  return s;
}

}  // namespace treecrf
