#pragma once

#include "core/rng.hpp"
#include "core/search_tree.hpp"

namespace treebandit {

struct ValueEstimator {
  int rollouts = 1;
};

/// Mean leaf reward of `est.rollouts` independent uniform rollouts from s.
double estimate_value(const ValueEstimator& est, const SearchTree& tree, StateId s, RngStream& rng);

inline double true_value(const SearchTree& tree, StateId s) { return tree.true_value(s); }

}  // namespace treebandit
