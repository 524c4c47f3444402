#pragma once

#include <vector>

#include "core/rng.hpp"
#include "core/trajectory.hpp"
#include "envs/value.hpp"
#include "search/policy.hpp"

namespace treebandit {

struct SearchConfig {
  int budget = 50;
  Policy policy;
  ValueEstimator estimator;
};

struct SearchRun {
  Trajectory trajectory;
  /// paths[t] is the root path chosen at selection t (paths[0] = {root}).
  std::vector<std::vector<StateId>> paths;
  /// An N(s) walk ended in a visited leaf; the run stopped there.
  bool dead_end = false;
};

/// Runs one search episode. Selection draws come from rng.split("select"),
/// value estimates from rng.split("value").
SearchRun run_search(const SearchTree& tree, const SearchConfig& cfg, const RngStream& rng);

/// Root step: the root, its estimated value and its children.
StepRecord observe(const SearchTree& tree, StateId s, const ValueEstimator& est, RngStream& value_rng);

}  // namespace treebandit
