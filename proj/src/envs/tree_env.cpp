#include "envs/tree_env.hpp"

#include <numeric>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace treebandit {

namespace {
constexpr double kRewardTable[] = {1.0, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
}

std::vector<double> default_goal_rewards(int k) {
  if (k < 1 || k > 8) {
    throw ParameterError("default goal rewards exist for 1..8 goals; pass goal_rewards explicitly for K=" +
                         std::to_string(k));
  }
  return {std::begin(kRewardTable), std::begin(kRewardTable) + k};
}

void check_goal_rewards(const std::vector<double>& rewards) {
  if (rewards.empty()) throw ParameterError("at least one goal reward is required");
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!(rewards[i] > 0.0 && rewards[i] <= 1.0)) throw ParameterError("goal rewards must lie in (0, 1]");
    if (i > 0 && !(rewards[i] < rewards[i - 1])) throw ParameterError("goal rewards must be strictly decreasing");
  }
}

std::uint64_t accessible_state_count(int branching, int depth) {
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (int d = 1; d <= depth; ++d) {
    level *= static_cast<std::uint64_t>(branching);
    total += level;
  }
  return total;
}

TreeInstance generate_tree(const TreeSpec& spec_in) {
  TreeSpec spec = spec_in;
  if (spec.branching < 2) throw ParameterError("branching must be at least 2");
  if (spec.depth < 1) throw ParameterError("depth must be at least 1");
  if (spec.num_goals < 1) throw ParameterError("at least one goal is required");
  if (spec.goal_rewards.empty()) spec.goal_rewards = default_goal_rewards(spec.num_goals);
  if (static_cast<int>(spec.goal_rewards.size()) != spec.num_goals) {
    throw ParameterError("goal_rewards must list exactly num_goals values");
  }
  check_goal_rewards(spec.goal_rewards);
  if (accessible_state_count(spec.branching, spec.depth) > 50'000'000ULL) {
    throw ParameterError("tree too large to materialise");
  }

  ExplicitTree tree = ExplicitTree::perfect(spec.branching, spec.depth);
  std::vector<StateId> leaves = tree.leaves();
  if (static_cast<std::size_t>(spec.num_goals) > leaves.size()) {
    throw ParameterError("more goals than leaves");
  }

  // Partial Fisher-Yates: the first K slots are a uniform K-subset in uniform order.
  RngStream rng(spec.seed, "tree-goals");
  std::vector<GoalAssignment> goals;
  for (int i = 0; i < spec.num_goals; ++i) {
    const std::size_t j = i + rng.uniform_index(leaves.size() - i);
    std::swap(leaves[i], leaves[j]);
    goals.push_back({leaves[i], spec.goal_rewards[i]});
    tree.set_reward(leaves[i], spec.goal_rewards[i]);
  }
  return TreeInstance{std::move(spec), std::move(tree), std::move(goals)};
}

}  // namespace treebandit
