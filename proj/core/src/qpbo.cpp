#include "treecrf/qpbo.hpp"

#include <cmath>
#include <limits>

#include "treecrf/errors.hpp"
#include "treecrf/maxflow.hpp"

namespace treecrf {

Qpbo::Qpbo(int variable_count) : n_(variable_count), u0_(variable_count, 0.0), u1_(variable_count, 0.0) {}

void Qpbo::add_unary(int i, double e0, double e1) {
  u0_.at(i) += e0;
  u1_.at(i) += e1;
}

void Qpbo::add_pairwise(int i, int j, double e00, double e01, double e10, double e11) {
  if (i == j) throw ValidationError("qpbo: pairwise term on a single variable");
  pairwise_.push_back({i, j, e00, e01, e10, e11});
}

void Qpbo::add_implication(int i, int j) { implications_.emplace_back(i, j); }

void Qpbo::fix(int i, int value) { fixed_.emplace_back(i, value); }

bool Qpbo::submodular() const {
  for (const auto& t : pairwise_) {
    if (t.e01 + t.e10 < t.e00 + t.e11) return false;
  }
  return true;
}

double Qpbo::energy(std::span<const int> x) const {
  double e = 0.0;
  for (int i = 0; i < n_; ++i) e += x[i] ? u1_[i] : u0_[i];
  for (const auto& t : pairwise_) {
    const int a = x[t.i];
    const int b = x[t.j];
    e += a ? (b ? t.e11 : t.e10) : (b ? t.e01 : t.e00);
  }
  for (const auto& [i, j] : implications_) {
    if (x[i] == 1 && x[j] == 0) return std::numeric_limits<double>::infinity();
  }
  for (const auto& [i, v] : fixed_) {
    if (x[i] != v) return std::numeric_limits<double>::infinity();
  }
  return e;
}

std::vector<int> Qpbo::solve() {
  // Hard constraints become finite arcs heavier than any attainable soft energy, so a
  // violating cut can never be minimal while the flow stays finite.
  double scale = 1.0;
  for (int i = 0; i < n_; ++i) scale += std::abs(u0_[i]) + std::abs(u1_[i]);
  for (const auto& t : pairwise_) scale += std::abs(t.e00) + std::abs(t.e01) + std::abs(t.e10) + std::abs(t.e11);
  const double hard = 4.0 * scale;

  // Reparametrize: V = e00 + (e10 - e00) x_i + (e11 - e10) x_j + w (1 - x_i) x_j,
  // w = e01 + e10 - e00 - e11.
  std::vector<double> d(n_);  // cost of x = 1 relative to x = 0
  for (int i = 0; i < n_; ++i) d[i] = u1_[i] - u0_[i];
  struct Coupling {
    int i, j;
    double w;
  };
  std::vector<Coupling> couplings;
  couplings.reserve(pairwise_.size());
  bool is_submodular = true;
  for (const auto& t : pairwise_) {
    d[t.i] += t.e10 - t.e00;
    d[t.j] += t.e11 - t.e10;
    const double w = t.e01 + t.e10 - t.e00 - t.e11;
    if (w < 0) {
      // w (1 - x_i) x_j = w (1 - x_i) + (-w) (1 - x_i) (1 - x_j)
      d[t.i] -= w;
      is_submodular = false;
    }
    if (w != 0) couplings.push_back({t.i, t.j, w});
  }
  for (const auto& [i, v] : fixed_) d[i] += v ? -hard : hard;

  if (is_submodular) {
    MaxFlowGraph g(n_);
    for (int i = 0; i < n_; ++i) {
      if (d[i] > 0) g.add_terminal_weights(i, d[i], 0.0);
      if (d[i] < 0) g.add_terminal_weights(i, 0.0, -d[i]);
    }
    for (const auto& c : couplings) g.add_edge(c.i, c.j, c.w);  // cut when x_i = 0, x_j = 1
    for (const auto& [i, j] : implications_) g.add_edge(j, i, hard);  // cut when x_i = 1, x_j = 0
    g.solve();
    std::vector<int> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = g.segment(i) == MaxFlowGraph::Segment::kSink ? 1 : 0;
    return x;
  }

  // Doubled graph: node i carries x_i, node n + i carries its complement.
  MaxFlowGraph g(2 * n_);
  const auto bar = [this](int i) { return n_ + i; };
  for (int i = 0; i < n_; ++i) {
    const double half = 0.5 * d[i];
    if (half > 0) {
      g.add_terminal_weights(i, half, 0.0);
      g.add_terminal_weights(bar(i), 0.0, half);
    } else if (half < 0) {
      g.add_terminal_weights(i, 0.0, -half);
      g.add_terminal_weights(bar(i), -half, 0.0);
    }
  }
  for (const auto& c : couplings) {
    const double half = 0.5 * std::abs(c.w);
    if (c.w > 0) {
      g.add_edge(c.i, c.j, half);
      g.add_edge(bar(c.j), bar(c.i), half);
    } else {
      g.add_edge(c.i, bar(c.j), half);
      g.add_edge(c.j, bar(c.i), half);
    }
  }
  for (const auto& [i, j] : implications_) {
    g.add_edge(j, i, hard);
    g.add_edge(bar(i), bar(j), hard);
  }
  g.solve();
  std::vector<int> x(n_, kUnlabeled);
  for (int i = 0; i < n_; ++i) {
    const bool direct_sink = g.segment(i) == MaxFlowGraph::Segment::kSink;
    const bool mirror_sink = g.segment(bar(i)) == MaxFlowGraph::Segment::kSink;
    if (!direct_sink && mirror_sink) x[i] = 0;
    if (direct_sink && !mirror_sink) x[i] = 1;
  }
  return x;
}

}  // namespace treecrf
