#pragma once

#include <span>
#include <vector>

namespace treecrf {

/// Quadratic pseudo-boolean minimization by roof duality. Submodular energies are solved
/// exactly on a single graph; otherwise the doubled graph yields a partial labelling
/// whose labelled part agrees with some global minimum.
class Qpbo {
 public:
  static constexpr int kUnlabeled = -1;

  explicit Qpbo(int variable_count);

  int variable_count() const { return n_; }

  void add_unary(int i, double e0, double e1);
  void add_pairwise(int i, int j, double e00, double e01, double e10, double e11);
  /// Hard constraint: x_i = 1 implies x_j = 1.
  void add_implication(int i, int j);
  /// Hard constraint: x_i == value.
  void fix(int i, int value);

  bool submodular() const;

  /// Per variable 0, 1 or kUnlabeled.
  std::vector<int> solve();

  /// Energy of a complete assignment; hard constraint violations give +infinity.
  double energy(std::span<const int> x) const;

 private:
  struct Pairwise {
    int i, j;
    double e00, e01, e10, e11;
  };

  int n_;
  std::vector<double> u0_;
  std::vector<double> u1_;
  std::vector<Pairwise> pairwise_;
  std::vector<std::pair<int, int>> implications_;
  std::vector<std::pair<int, int>> fixed_;
};

}  // namespace treecrf
