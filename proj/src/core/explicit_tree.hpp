#pragma once

#include <vector>

#include "core/search_tree.hpp"

namespace treebandit {

/// Fully materialised tree with dense, breadth-first StateIds (root = 0).
class ExplicitTree final : public SearchTree {
 public:
  /// `children[i]` lists the children of state i; `rewards[i]` its reward.
  /// Ids must already be in breadth-first order with the root at 0.
  ExplicitTree(std::vector<std::vector<StateId>> children, std::vector<double> rewards);

  /// Perfect `branching`-ary tree of the given depth with all rewards zero.
  static ExplicitTree perfect(int branching, int depth);

  Family family() const override { return Family::Tree; }
  StateId root() const override { return StateId{0}; }
  const std::vector<StateId>& children(StateId s) const override;
  double reward(StateId s) const override;
  std::optional<StateId> parent(StateId s) const override;
  int depth(StateId s) const override;
  int max_depth() const override { return max_depth_; }
  std::optional<std::size_t> state_count() const override { return children_.size(); }
  double best_reward() const override { return best_reward_; }
  int best_reward_path_length() const override { return best_depth_; }
  bool contains(StateId s) const override { return s.value < children_.size(); }

  std::size_t size() const { return children_.size(); }
  std::vector<StateId> leaves() const;
  void set_reward(StateId s, double r);

 private:
  void check(StateId s) const;
  void refresh_best();

  std::vector<std::vector<StateId>> children_;
  std::vector<double> rewards_;
  std::vector<std::int64_t> parent_;
  std::vector<int> depth_;
  int max_depth_ = 0;
  double best_reward_ = 0.0;
  int best_depth_ = 0;
};

}  // namespace treebandit
