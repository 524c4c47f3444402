#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "core/rational.hpp"
#include "core/trajectory.hpp"

namespace treebandit {

/// Visit counts and backed-up value sums of revealed states.
///
/// Sums are exact so that mathematically tied subtrees compare equal no
/// matter the order in which their values arrived.
class TreeStats {
 public:
  std::int64_t count(StateId s) const;
  const Rational& value(StateId s) const;
  /// Adds one visit and `value` to every state on `path`.
  void backpropagate(const std::vector<StateId>& path, const Rational& value);
  bool empty() const { return entries_.empty(); }

 private:
  struct Entry {
    std::int64_t count = 0;
    Rational value;
  };
  std::unordered_map<StateId, Entry> entries_;
};

inline TreeStats backpropagate(TreeStats stats, const std::vector<StateId>& path, double observed_value) {
  stats.backpropagate(path, Rational::from_double(observed_value));
  return stats;
}

/// Everything an agent knows after a trajectory prefix: the frontier, each
/// visited state's recorded value, and the statistics table. Every step,
/// the root included, is backed up along its root path.
class SearchState {
 public:
  explicit SearchState(const StepRecord& root_step);
  static SearchState from_prefix(const std::vector<StepRecord>& prefix);

  /// Records a selection; the state must be a frontier member.
  void record(const StepRecord& step);

  const Frontier& frontier() const { return frontier_; }
  const TreeStats& stats() const { return stats_; }
  const std::vector<StepRecord>& steps() const { return steps_; }
  StateId root() const { return frontier_.root(); }
  /// Value recorded when s was visited.
  double value_of(StateId s) const;
  /// Root-to-s states using revealed parent links.
  std::vector<StateId> path_to(StateId s) const;

 private:
  Frontier frontier_;
  TreeStats stats_;
  std::vector<StepRecord> steps_;
  std::unordered_map<StateId, double> values_;
};

}  // namespace treebandit
