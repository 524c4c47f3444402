#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "core/rng.hpp"

namespace treebandit {

/// Opaque handle of a state, unique within one problem instance.
struct StateId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(StateId, StateId) = default;
};

enum class Family { Tree, Nav };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

/// The hidden environment: a finite rooted tree with leaf rewards in [0, 1].
///
/// Agents never see this object; the search and protocol layers only reveal
/// children and sampled values. Implementations may expand states lazily
/// (navigation trees are far too large to materialise), so `children()`
/// returns a reference that stays valid for the lifetime of the tree.
class SearchTree {
 public:
  virtual ~SearchTree() = default;

  virtual Family family() const = 0;
  virtual StateId root() const = 0;
  virtual const std::vector<StateId>& children(StateId s) const = 0;
  virtual double reward(StateId s) const = 0;
  virtual std::optional<StateId> parent(StateId s) const = 0;
  virtual int depth(StateId s) const = 0;
  virtual int max_depth() const = 0;
  /// Number of states when known without expansion.
  virtual std::optional<std::size_t> state_count() const = 0;
  /// Highest reward of any state in the tree.
  virtual double best_reward() const = 0;
  /// Length of the shortest root-to-state path that attains best_reward().
  virtual int best_reward_path_length() const = 0;
  virtual bool contains(StateId s) const = 0;

  /// Reward of the leaf reached by uniform random descent from s.
  virtual double rollout(StateId s, RngStream& rng) const;
  /// Exact expected rollout reward V(s).
  virtual double true_value(StateId s) const;

  bool is_leaf(StateId s) const { return children(s).empty(); }
  /// Position of s among its parent's children (0 for the root).
  std::size_t child_index(StateId s) const;
  /// States from the root down to s, inclusive.
  std::vector<StateId> root_path(StateId s) const;
};

}  // namespace treebandit

template <>
struct std::hash<treebandit::StateId> {
  std::size_t operator()(treebandit::StateId s) const noexcept { return std::hash<std::uint32_t>{}(s.value); }
};
