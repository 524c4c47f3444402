#include "core/explicit_tree.hpp"

#include <algorithm>
#include <string>

#include "core/errors.hpp"

namespace treebandit {

ExplicitTree::ExplicitTree(std::vector<std::vector<StateId>> children, std::vector<double> rewards)
    : children_(std::move(children)), rewards_(std::move(rewards)) {
  const std::size_t n = children_.size();
  if (n == 0) throw StructuralError("tree must contain a root");
  if (rewards_.size() != n) throw StructuralError("reward table size does not match state count");
  parent_.assign(n, -1);
  depth_.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (StateId c : children_[s]) {
      if (c.value >= n) throw StructuralError("child id out of range");
      if (c.value <= s) throw StructuralError("state ids must be assigned in breadth-first order");
      if (parent_[c.value] != -1) throw StructuralError("state " + std::to_string(c.value) + " has two parents");
      parent_[c.value] = static_cast<std::int64_t>(s);
      depth_[c.value] = depth_[s] + 1;
      max_depth_ = std::max(max_depth_, depth_[c.value]);
    }
  }
  for (std::size_t s = 1; s < n; ++s) {
    if (parent_[s] == -1) throw StructuralError("state " + std::to_string(s) + " is unreachable from the root");
  }
  for (std::size_t s = 0; s < n; ++s) {
    const double r = rewards_[s];
    if (!(r >= 0.0 && r <= 1.0)) throw StructuralError("reward outside [0, 1]");
    if (r > 0.0 && !children_[s].empty()) throw StructuralError("goal states must be leaves");
  }
  refresh_best();
}

ExplicitTree ExplicitTree::perfect(int branching, int depth) {
  if (branching < 1 || depth < 0) throw ParameterError("perfect tree needs branching >= 1 and depth >= 0");
  std::vector<std::vector<StateId>> kids;
  std::size_t level_begin = 0;
  std::size_t level_end = 1;
  kids.emplace_back();
  for (int d = 0; d < depth; ++d) {
    for (std::size_t s = level_begin; s < level_end; ++s) {
      for (int b = 0; b < branching; ++b) {
        kids[s].push_back(StateId{static_cast<std::uint32_t>(kids.size())});
        kids.emplace_back();
      }
    }
    level_begin = level_end;
    level_end = kids.size();
  }
  std::vector<double> rewards(kids.size(), 0.0);
  return ExplicitTree(std::move(kids), std::move(rewards));
}

void ExplicitTree::check(StateId s) const {
  if (s.value >= children_.size()) throw StructuralError("state " + std::to_string(s.value) + " not in tree");
}

const std::vector<StateId>& ExplicitTree::children(StateId s) const {
  check(s);
  return children_[s.value];
}

double ExplicitTree::reward(StateId s) const {
  check(s);
  return rewards_[s.value];
}

std::optional<StateId> ExplicitTree::parent(StateId s) const {
  check(s);
  if (parent_[s.value] < 0) return std::nullopt;
  return StateId{static_cast<std::uint32_t>(parent_[s.value])};
}

int ExplicitTree::depth(StateId s) const {
  check(s);
  return depth_[s.value];
}

std::vector<StateId> ExplicitTree::leaves() const {
  std::vector<StateId> out;
  for (std::size_t s = 0; s < children_.size(); ++s) {
    if (children_[s].empty()) out.push_back(StateId{static_cast<std::uint32_t>(s)});
  }
  return out;
}

void ExplicitTree::set_reward(StateId s, double r) {
  check(s);
  if (!(r >= 0.0 && r <= 1.0)) throw StructuralError("reward outside [0, 1]");
  if (r > 0.0 && !children_[s.value].empty()) throw StructuralError("goal states must be leaves");
  rewards_[s.value] = r;
  refresh_best();
}

void ExplicitTree::refresh_best() {
  best_reward_ = 0.0;
  best_depth_ = 0;
  for (std::size_t s = 0; s < rewards_.size(); ++s) {
    if (rewards_[s] > best_reward_) {
      best_reward_ = rewards_[s];
      best_depth_ = depth_[s];
    } else if (rewards_[s] == best_reward_ && best_reward_ > 0.0) {
      best_depth_ = std::min(best_depth_, depth_[s]);
    }
  }
}

}  // namespace treebandit
