#pragma once

#include <cstdint>
#include <vector>

#include "core/explicit_tree.hpp"

namespace treebandit {

struct TreeSpec {
  int branching = 2;
  int depth = 6;
  int num_goals = 8;
  std::vector<double> goal_rewards;  // empty: default_goal_rewards(num_goals)
  std::uint64_t seed = 0;
};

struct GoalAssignment {
  StateId state;
  double reward = 0.0;
  friend bool operator==(const GoalAssignment&, const GoalAssignment&) = default;
};

/// The K largest of {1.0, 0.7, ..., 0.1}, descending.
std::vector<double> default_goal_rewards(int k);

/// Throws ParameterError unless rewards are positive, at most 1 and strictly decreasing.
void check_goal_rewards(const std::vector<double>& rewards);

/// Non-root states of a perfect B-ary tree of depth D.
std::uint64_t accessible_state_count(int branching, int depth);

struct TreeInstance {
  TreeSpec spec;
  ExplicitTree tree;
  std::vector<GoalAssignment> goals;  // in draw order
};

/// Perfect B-ary tree of depth D with K goal leaves drawn without replacement;
/// the i-th drawn leaf receives the i-th reward.
TreeInstance generate_tree(const TreeSpec& spec);

}  // namespace treebandit
