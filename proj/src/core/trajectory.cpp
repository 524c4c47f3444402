#include "core/trajectory.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "core/errors.hpp"

namespace treebandit {

namespace {
const std::vector<StateId> kNoChildren;
}

Frontier::Frontier(const StepRecord& root_step) { visit(root_step); }

bool Frontier::contains(StateId s) const {
  return revealed(s) && !visited(s) && s != root_;
}

std::optional<std::size_t> Frontier::index_of(StateId s) const {
  const auto it = std::find(members_.begin(), members_.end(), s);
  if (it == members_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - members_.begin());
}

std::optional<StateId> Frontier::parent_of(StateId s) const {
  const auto it = parent_.find(s);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

const std::vector<StateId>& Frontier::revealed_children(StateId s) const {
  const auto it = revealed_children_.find(s);
  return it == revealed_children_.end() ? kNoChildren : it->second;
}

std::size_t Frontier::live_count(StateId s) const {
  const auto it = live_.find(s);
  return it == live_.end() ? 0 : it->second;
}

void Frontier::add_live(StateId s, long delta) {
  for (std::optional<StateId> cur = s; cur; cur = parent_of(*cur)) {
    auto& n = live_[*cur];
    n = static_cast<std::size_t>(static_cast<long>(n) + delta);
  }
}

void Frontier::visit(const StepRecord& step) {
  const StateId s = step.state;
  if (!started_) {
    started_ = true;
    root_ = s;
  } else {
    const auto idx = index_of(s);
    if (!idx) throw StructuralError("state " + std::to_string(s.value) + " selected outside the frontier");
    members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(*idx));
    add_live(s, -1);
  }
  revealed_children_[s] = step.children;
  visit_order_.push_back(s);
  for (StateId c : step.children) {
    if (c == root_ || parent_.contains(c)) {
      throw StructuralError("state " + std::to_string(c.value) + " revealed twice");
    }
    parent_.emplace(c, s);
    members_.push_back(c);
    add_live(c, +1);
  }
}

Frontier frontier_after(const std::vector<StepRecord>& prefix) {
  if (prefix.empty()) throw StructuralError("trajectory prefix is empty");
  Frontier f;
  for (const auto& step : prefix) f.visit(step);
  return f;
}

bool is_fully_explored(StateId s, const Frontier& frontier, ExclusionRule rule) {
  if (frontier.contains(s)) return false;
  if (rule == ExclusionRule::Recursive) return frontier.live_count(s) == 0;
  const auto& kids = frontier.revealed_children(s);
  return std::none_of(kids.begin(), kids.end(), [&](StateId c) { return frontier.contains(c); });
}

std::vector<StateId> modified_successors(StateId s, const Frontier& frontier, ExclusionRule rule) {
  std::vector<StateId> out;
  for (StateId c : frontier.revealed_children(s)) {
    if (!is_fully_explored(c, frontier, rule)) out.push_back(c);
  }
  return out;
}

double best_reward(const Trajectory& t, const SearchTree& tree) {
  double best = 0.0;
  for (const auto& step : t.steps) best = std::max(best, tree.reward(step.state));
  return best;
}

void validate_trajectory(const Trajectory& t, const SearchTree& tree) {
  if (t.steps.empty()) throw StructuralError("trajectory has no steps");
  if (t.steps.front().state != tree.root()) throw StructuralError("trajectory does not start at the root");
  std::unordered_set<StateId> seen;
  Frontier f;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& step = t.steps[i];
    if (!seen.insert(step.state).second) {
      throw StructuralError("state visited twice at step " + std::to_string(i));
    }
    if (step.children != tree.children(step.state)) {
      throw StructuralError("recorded children differ from the environment at step " + std::to_string(i));
    }
    if (!(step.value >= 0.0 && step.value <= 1.0)) {
      throw StructuralError("value outside [0, 1] at step " + std::to_string(i));
    }
    f.visit(step);
  }
}

}  // namespace treebandit
