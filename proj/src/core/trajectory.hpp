#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "core/search_tree.hpp"

namespace treebandit {

struct StepRecord {
  StateId state;
  double value = 0.0;
  std::vector<StateId> children;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// steps[0] is the root; steps[t] for t >= 1 is the t-th selection.
struct Trajectory {
  std::vector<StepRecord> steps;
  /// Set when the frontier emptied before the budget was spent.
  bool exhausted = false;

  std::size_t selections() const { return steps.empty() ? 0 : steps.size() - 1; }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// When a visited state counts as fully explored for the N* successor rule.
enum class ExclusionRule {
  /// No frontier member anywhere in the subtree (default).
  Recursive,
  /// Only immediate children are inspected.
  Literal,
};

/// Revealed-but-unvisited states, kept in order of first revelation.
///
/// Besides the members it remembers everything the agent has seen: which
/// states were visited, the revealed child list of each visited state and the
/// parent of every revealed state. Per-subtree frontier counts are maintained
/// incrementally so exclusion checks are O(1).
class Frontier {
 public:
  Frontier() = default;
  explicit Frontier(const StepRecord& root_step);

  /// Visits a member (or, for the first call on an empty object, the root).
  void visit(const StepRecord& step);

  const std::vector<StateId>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  bool contains(StateId s) const;
  std::optional<std::size_t> index_of(StateId s) const;

  bool visited(StateId s) const { return revealed_children_.contains(s); }
  bool revealed(StateId s) const { return s == root_ || parent_.contains(s); }
  std::optional<StateId> parent_of(StateId s) const;
  /// Children recorded when s was visited; empty for unvisited states.
  const std::vector<StateId>& revealed_children(StateId s) const;
  /// Frontier members in the subtree rooted at s, s included.
  std::size_t live_count(StateId s) const;

  StateId root() const { return root_; }
  std::size_t visit_count() const { return visit_order_.size(); }
  const std::vector<StateId>& visit_order() const { return visit_order_; }

 private:
  void add_live(StateId s, long delta);

  StateId root_{};
  bool started_ = false;
  std::vector<StateId> members_;
  std::unordered_map<StateId, StateId> parent_;
  std::unordered_map<StateId, std::vector<StateId>> revealed_children_;
  std::unordered_map<StateId, std::size_t> live_;
  std::vector<StateId> visit_order_;
};

/// Frontier after replaying a trajectory prefix. Throws StructuralError when
/// the prefix is inconsistent (selection outside the frontier, a child
/// revealed twice).
Frontier frontier_after(const std::vector<StepRecord>& prefix);

bool is_fully_explored(StateId s, const Frontier& frontier, ExclusionRule rule = ExclusionRule::Recursive);

/// N*(s): revealed children of s whose subtrees are not fully explored.
std::vector<StateId> modified_successors(StateId s, const Frontier& frontier,
                                         ExclusionRule rule = ExclusionRule::Recursive);

double best_reward(const Trajectory& t, const SearchTree& tree);

/// Checks every Trajectory invariant against the hidden tree.
void validate_trajectory(const Trajectory& t, const SearchTree& tree);

}  // namespace treebandit
