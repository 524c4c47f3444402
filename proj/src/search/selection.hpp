#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/rational.hpp"
#include "core/rng.hpp"
#include "search/policy.hpp"
#include "search/tree_stats.hpp"

namespace treebandit {

/// value/count + c * sqrt(ln(2 * parent_count) / count); +inf when count is 0.
///
/// The hard-attention UCT construction calls this same function so that both
/// sides round identically.
double uct_score(const Rational& value, std::int64_t count, std::int64_t parent_count, double c);

/// Score a traversal policy assigns to `child` below `parent` (higher wins).
double traversal_score(const Policy& policy, const TreeStats& stats, StateId parent, StateId child);

/// Outcome of one selection. `path` runs from the root to the selected state
/// (path policies) or to the visited leaf where an N(s) walk got stuck.
struct Selection {
  std::optional<StateId> state;
  std::vector<StateId> path;
  bool dead_end() const { return !state.has_value(); }
};

StateId step_uniform_leaf(const Frontier& frontier, RngStream& rng);
StateId step_greedy_leaf(const SearchState& st, GreedyLeafTies ties, RngStream& rng);
Selection step_uniform_path(const SearchState& st, const Policy& policy, RngStream& rng);
Selection step_policy_path(const SearchState& st, const Policy& policy, RngStream& rng);

/// Dispatches on policy.kind. Throws StructuralError on an empty frontier.
Selection select_next(const Policy& policy, const SearchState& st, RngStream& rng);

/// Candidate set a path walk chooses from uniformly at `node`.
struct WalkChoice {
  enum class Kind { Stop, DeadEnd, Branch } kind = Kind::Stop;
  std::vector<StateId> options;
};
WalkChoice walk_choice(const Policy& policy, const SearchState& st, StateId node);

struct NextStateDistribution {
  /// Frontier members in frontier order; probabilities may be zero.
  std::vector<StateId> support;
  std::vector<double> probabilities;
  /// Exact probabilities when available (analytic mode without overflow).
  std::vector<Rational> exact;
  /// Mass of N(s) walks that end in a visited leaf.
  double dead_end_mass = 0.0;
  Rational exact_dead_end_mass;
  bool is_exact() const { return !exact.empty(); }
  double probability_of(StateId s) const;
};

enum class DistributionMode { Analytic, Empirical };

/// Analytic mode is exact for all six policies (ties are uniform and every
/// other choice is deterministic given the prefix). Empirical mode re-samples
/// the next selection `samples` times with streams split from `rng`.
NextStateDistribution next_state_distribution(const Policy& policy, const SearchState& st, DistributionMode mode,
                                              int samples = 100, const RngStream* rng = nullptr);
NextStateDistribution next_state_distribution(const Policy& policy, const std::vector<StepRecord>& prefix,
                                              DistributionMode mode, int samples = 100,
                                              const RngStream* rng = nullptr);

}  // namespace treebandit
