#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "core/search_tree.hpp"

namespace treebandit {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct NavSpec {
  int width = 4;
  int height = 4;
  double wall_density = 0.4;
  int num_goals = 3;
  std::vector<double> goal_rewards;  // empty: default_goal_rewards(num_goals)
  int max_path_len = 50;
  Cell start{0, 0};
  std::uint64_t seed = 0;
};

struct NavGoal {
  Cell cell;
  double reward = 0.0;
  friend bool operator==(const NavGoal&, const NavGoal&) = default;
};

/// A concrete maze: grid, walls, start, goals and the path-length cap T.
struct NavLayout {
  int width = 0;
  int height = 0;
  int max_path_len = 0;
  Cell start;
  std::vector<Cell> walls;
  std::vector<NavGoal> goals;
};

/// Search tree over paths in a maze.
///
/// Paths are interned lazily: a StateId exists only once some caller asked for
/// the children of its parent. Ids are handed out in expansion order, which is
/// breadth-first within each parent. Neighbour order is up (y+1), down (y-1),
/// right (x+1), left (x-1).
class NavTree final : public SearchTree {
 public:
  explicit NavTree(NavLayout layout);

  Family family() const override { return Family::Nav; }
  StateId root() const override { return StateId{0}; }
  const std::vector<StateId>& children(StateId s) const override;
  double reward(StateId s) const override;
  std::optional<StateId> parent(StateId s) const override;
  int depth(StateId s) const override;
  int max_depth() const override { return layout_.max_path_len; }
  std::optional<std::size_t> state_count() const override { return std::nullopt; }
  double best_reward() const override { return best_reward_; }
  int best_reward_path_length() const override { return best_len_; }
  bool contains(StateId s) const override;
  double rollout(StateId s, RngStream& rng) const override;
  double true_value(StateId s) const override;

  const NavLayout& layout() const { return layout_; }
  Cell cell_of(StateId s) const;
  /// Vertices of the path, start first.
  std::vector<Cell> path(StateId s) const;
  std::size_t interned() const;

  bool is_wall(Cell c) const;
  /// 0 for non-goal vertices.
  double vertex_reward(Cell c) const;
  /// Shortest start-to-goal path length avoiding walls and other goals; -1 if unreachable.
  int goal_distance(Cell goal) const;

 private:
  struct Node {
    std::int64_t parent;
    int vertex;
    int length;
    bool expanded;
    std::vector<StateId> kids;
  };

  int index(Cell c) const { return c.y * layout_.width + c.x; }
  Cell cell(int v) const { return Cell{v % layout_.width, v / layout_.width}; }
  /// Vertices a path ending at v with the given length may append.
  void successors(int v, int length, std::vector<int>& out) const;
  const Node& node(StateId s) const;

  NavLayout layout_;
  std::vector<unsigned char> wall_;
  std::vector<double> goal_reward_;
  std::vector<double> value_table_;  // (length, vertex) -> V
  double best_reward_ = 0.0;
  int best_len_ = 0;

  mutable std::mutex mu_;
  mutable std::deque<Node> nodes_;
};

std::string cell_name(Cell c);

struct NavInstance {
  NavSpec spec;
  NavLayout layout;
};

/// Places round(density * w * h) walls and K goals uniformly, rejecting
/// layouts in which some goal is not reachable within T steps.
NavInstance generate_nav(const NavSpec& spec);

void validate_layout(const NavLayout& layout);

}  // namespace treebandit
