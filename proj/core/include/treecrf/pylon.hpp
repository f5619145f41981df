#pragma once

#include <string>
#include <vector>

#include "treecrf/energy.hpp"
#include "treecrf/hierarchy.hpp"

namespace treecrf {

struct ExpansionStats {
  std::vector<double> energy_trace;  // initial energy, then one entry per committed move
  int cycles = 0;
  int committed_moves = 0;
  int unlabeled_variables = 0;  // summed over all QPBO solves
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Two-class Pylon inference. Globally optimal whenever the leaf pairwise terms are
/// submodular, which holds for any compatibility with a zero diagonal.
PylonSolution binary_pylon(const Hierarchy& hierarchy, const EnergyModel& model, int foreground, int background);

/// Every leaf active with its lowest-unary class; all internal nodes inactive.
std::vector<int> unary_leaf_labelling(const Hierarchy& hierarchy, const EnergyModel& model);

/// Multi-class inference by expansion moves, cycling alpha = 0..C-1 until a full cycle
/// commits nothing or `max_cycles` is reached. `init` must be feasible.
PylonSolution alpha_expansion(const Hierarchy& hierarchy, const EnergyModel& model, std::vector<int> init,
                              ExpansionStats* stats = nullptr, int max_cycles = 20);

/// Replaces a uniformly labelled cover of a subtree by its root whenever that does not
/// raise the energy, so equal-energy solutions resolve toward larger regions.
void promote_uniform_subtrees(const Hierarchy& hierarchy, const EnergyModel& model, std::vector<int>& node_label);

}  // namespace treecrf
