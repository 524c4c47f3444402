#pragma once

#include <string>
#include <string_view>

#include "core/trajectory.hpp"

namespace treebandit {

enum class PolicyKind {
  UniformLeaf,
  GreedyLeaf,
  UniformPath,
  PathPureExploration,
  PathGreedy,
  PathUCT,
};

/// How greedy leaf sampling breaks ties between equally valued parents.
enum class GreedyLeafTies {
  /// Uniform over every frontier state whose parent is maximal.
  Pooled,
  /// Uniform over maximal parents, then uniform over that parent's frontier children.
  ParentFirst,
};

/// Successor set used by path walks.
enum class SuccessorRule {
  /// N*(s): fully explored subtrees removed.
  Modified,
  /// N(s): every revealed child; walks may end in a visited leaf.
  Plain,
};

struct Policy {
  PolicyKind kind = PolicyKind::UniformLeaf;
  double c = 0.1;
  GreedyLeafTies leaf_ties = GreedyLeafTies::Pooled;
  SuccessorRule successors = SuccessorRule::Modified;
  ExclusionRule exclusion = ExclusionRule::Recursive;

  bool is_path() const { return kind != PolicyKind::UniformLeaf && kind != PolicyKind::GreedyLeaf; }
};

inline Policy make_policy(PolicyKind kind) { return Policy{kind}; }

/// "uniform-leaf", "greedy-leaf", "uniform-path", "path-pure-exploration",
/// "path-greedy", "path-uct".
std::string_view policy_kind_name(PolicyKind k);
PolicyKind parse_policy_kind(std::string_view name);
/// Kind name plus non-default options, e.g. "path-uct:c=0.2:succ=plain".
std::string policy_name(const Policy& p);
Policy parse_policy(std::string_view text);

inline constexpr PolicyKind kAllPolicyKinds[] = {
    PolicyKind::UniformLeaf,         PolicyKind::GreedyLeaf, PolicyKind::UniformPath,
    PolicyKind::PathPureExploration, PolicyKind::PathGreedy, PolicyKind::PathUCT,
};

}  // namespace treebandit
