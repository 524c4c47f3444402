#include "envs/nav_env.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "envs/tree_env.hpp"

namespace treebandit {

namespace {
constexpr int kDx[] = {0, 0, 1, -1};
constexpr int kDy[] = {1, -1, 0, 0};
constexpr int kMaxAttempts = 10000;
}  // namespace

std::string cell_name(Cell c) { return "x" + std::to_string(c.x) + "y" + std::to_string(c.y); }

void validate_layout(const NavLayout& l) {
  if (l.width < 1 || l.height < 1) throw ParameterError("grid must be at least 1x1");
  if (l.max_path_len < 1) throw ParameterError("max path length must be at least 1");
  const auto inside = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < l.width && c.y < l.height; };
  if (!inside(l.start)) throw StructuralError("start outside the grid");
  std::vector<int> used(static_cast<std::size_t>(l.width * l.height), 0);
  const auto claim = [&](Cell c, const char* what) {
    if (!inside(c)) throw StructuralError(std::string(what) + " outside the grid");
    int& u = used[static_cast<std::size_t>(c.y * l.width + c.x)];
    if (u) throw StructuralError("start, walls and goals must be pairwise disjoint");
    u = 1;
  };
  claim(l.start, "start");
  for (Cell w : l.walls) claim(w, "wall");
  std::vector<double> rewards;
  for (const auto& g : l.goals) {
    claim(g.cell, "goal");
    rewards.push_back(g.reward);
  }
  check_goal_rewards(rewards);
}

NavTree::NavTree(NavLayout layout) : layout_(std::move(layout)) {
  validate_layout(layout_);
  const int n = layout_.width * layout_.height;
  wall_.assign(static_cast<std::size_t>(n), 0);
  goal_reward_.assign(static_cast<std::size_t>(n), 0.0);
  for (Cell w : layout_.walls) wall_[static_cast<std::size_t>(index(w))] = 1;
  for (const auto& g : layout_.goals) goal_reward_[static_cast<std::size_t>(index(g.cell))] = g.reward;

  // V over (length, vertex), filled from the longest paths back to the root.
  const int T = layout_.max_path_len;
  value_table_.assign(static_cast<std::size_t>((T + 1) * n), 0.0);
  std::vector<int> succ;
  for (int len = T; len >= 0; --len) {
    for (int v = 0; v < n; ++v) {
      double& out = value_table_[static_cast<std::size_t>(len * n + v)];
      if (wall_[static_cast<std::size_t>(v)]) continue;
      successors(v, len, succ);
      if (succ.empty()) {
        out = goal_reward_[static_cast<std::size_t>(v)];
        continue;
      }
      double sum = 0.0;
      for (int u : succ) sum += value_table_[static_cast<std::size_t>((len + 1) * n + u)];
      out = sum / static_cast<double>(succ.size());
    }
  }

  for (const auto& g : layout_.goals) {
    if (g.reward > best_reward_) {
      best_reward_ = g.reward;
      best_len_ = goal_distance(g.cell);
    }
  }

  nodes_.push_back(Node{-1, index(layout_.start), 0, false, {}});
}

bool NavTree::is_wall(Cell c) const {
  if (c.x < 0 || c.y < 0 || c.x >= layout_.width || c.y >= layout_.height) return true;
  return wall_[static_cast<std::size_t>(index(c))] != 0;
}

double NavTree::vertex_reward(Cell c) const {
  if (is_wall(c)) return 0.0;
  return goal_reward_[static_cast<std::size_t>(index(c))];
}

int NavTree::goal_distance(Cell goal) const {
  const int n = layout_.width * layout_.height;
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::queue<int> q;
  dist[static_cast<std::size_t>(index(layout_.start))] = 0;
  q.push(index(layout_.start));
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    const Cell c = cell(v);
    if (c == goal) return dist[static_cast<std::size_t>(v)];
    // Other goals end every path that enters them.
    if (v != index(layout_.start) && goal_reward_[static_cast<std::size_t>(v)] > 0.0) continue;
    for (int k = 0; k < 4; ++k) {
      const Cell nc{c.x + kDx[k], c.y + kDy[k]};
      if (is_wall(nc)) continue;
      const int u = index(nc);
      if (dist[static_cast<std::size_t>(u)] != -1) continue;
      dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
      q.push(u);
    }
  }
  return -1;
}

void NavTree::successors(int v, int length, std::vector<int>& out) const {
  out.clear();
  if (length >= layout_.max_path_len) return;
  if (length > 0 && goal_reward_[static_cast<std::size_t>(v)] > 0.0) return;
  const Cell c = cell(v);
  for (int k = 0; k < 4; ++k) {
    const Cell nc{c.x + kDx[k], c.y + kDy[k]};
    if (!is_wall(nc)) out.push_back(index(nc));
  }
}

const NavTree::Node& NavTree::node(StateId s) const {
  if (s.value >= nodes_.size()) throw StructuralError("state " + std::to_string(s.value) + " not in tree");
  return nodes_[s.value];
}

const std::vector<StateId>& NavTree::children(StateId s) const {
  std::lock_guard lock(mu_);
  const Node& nd = node(s);
  if (!nd.expanded) {
    std::vector<int> succ;
    successors(nd.vertex, nd.length, succ);
    std::vector<StateId> kids;
    for (int u : succ) {
      kids.push_back(StateId{static_cast<std::uint32_t>(nodes_.size())});
      nodes_.push_back(Node{static_cast<std::int64_t>(s.value), u, nd.length + 1, false, {}});
    }
    Node& mut = nodes_[s.value];
    mut.kids = std::move(kids);
    mut.expanded = true;
  }
  return nodes_[s.value].kids;
}

double NavTree::reward(StateId s) const {
  std::lock_guard lock(mu_);
  const Node& nd = node(s);
  return nd.length > 0 ? goal_reward_[static_cast<std::size_t>(nd.vertex)] : 0.0;
}

std::optional<StateId> NavTree::parent(StateId s) const {
  std::lock_guard lock(mu_);
  const Node& nd = node(s);
  if (nd.parent < 0) return std::nullopt;
  return StateId{static_cast<std::uint32_t>(nd.parent)};
}

int NavTree::depth(StateId s) const {
  std::lock_guard lock(mu_);
  return node(s).length;
}

bool NavTree::contains(StateId s) const {
  std::lock_guard lock(mu_);
  return s.value < nodes_.size();
}

Cell NavTree::cell_of(StateId s) const {
  std::lock_guard lock(mu_);
  return cell(node(s).vertex);
}

std::vector<Cell> NavTree::path(StateId s) const {
  std::lock_guard lock(mu_);
  std::vector<Cell> out;
  for (std::int64_t cur = s.value; cur >= 0;) {
    const Node& nd = node(StateId{static_cast<std::uint32_t>(cur)});
    out.push_back(cell(nd.vertex));
    cur = nd.parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t NavTree::interned() const {
  std::lock_guard lock(mu_);
  return nodes_.size();
}

double NavTree::rollout(StateId s, RngStream& rng) const {
  int v = 0;
  int len = 0;
  {
    std::lock_guard lock(mu_);
    const Node& nd = node(s);
    v = nd.vertex;
    len = nd.length;
  }
  // Walk vertices directly; interning every rollout path would grow without bound.
  std::vector<int> succ;
  for (;;) {
    successors(v, len, succ);
    if (succ.empty()) return len > 0 ? goal_reward_[static_cast<std::size_t>(v)] : 0.0;
    v = succ[rng.uniform_index(succ.size())];
    ++len;
  }
}

double NavTree::true_value(StateId s) const {
  std::lock_guard lock(mu_);
  const Node& nd = node(s);
  if (nd.length == 0 && goal_reward_[static_cast<std::size_t>(nd.vertex)] > 0.0) return 0.0;
  const int n = layout_.width * layout_.height;
  return value_table_[static_cast<std::size_t>(nd.length * n + nd.vertex)];
}

NavInstance generate_nav(const NavSpec& spec_in) {
  NavSpec spec = spec_in;
  if (spec.width < 1 || spec.height < 1) throw ParameterError("grid must be at least 1x1");
  if (!(spec.wall_density >= 0.0 && spec.wall_density < 1.0)) throw ParameterError("wall density must lie in [0, 1)");
  if (spec.max_path_len < 1) throw ParameterError("max path length must be at least 1");
  if (spec.num_goals < 1) throw ParameterError("at least one goal is required");
  if (spec.goal_rewards.empty()) spec.goal_rewards = default_goal_rewards(spec.num_goals);
  if (static_cast<int>(spec.goal_rewards.size()) != spec.num_goals) {
    throw ParameterError("goal_rewards must list exactly num_goals values");
  }
  check_goal_rewards(spec.goal_rewards);
  const int cells = spec.width * spec.height;
  if (spec.start.x < 0 || spec.start.y < 0 || spec.start.x >= spec.width || spec.start.y >= spec.height) {
    throw ParameterError("start outside the grid");
  }
  const int n_wall = static_cast<int>(std::lround(spec.wall_density * cells));
  if (n_wall + spec.num_goals + 1 > cells) throw ParameterError("grid too small for walls, goals and start");

  const int start = spec.start.y * spec.width + spec.start.x;
  std::vector<int> pool;
  for (int v = 0; v < cells; ++v) {
    if (v != start) pool.push_back(v);
  }
  const auto to_cell = [&](int v) { return Cell{v % spec.width, v / spec.width}; };

  RngStream base(spec.seed, "nav-layout");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RngStream rng = base.split(static_cast<std::uint64_t>(attempt));
    std::vector<int> order = pool;
    const int draws = n_wall + spec.num_goals;
    for (int i = 0; i < draws; ++i) {
      const std::size_t j = i + rng.uniform_index(order.size() - i);
      std::swap(order[i], order[j]);
    }
    NavLayout layout;
    layout.width = spec.width;
    layout.height = spec.height;
    layout.max_path_len = spec.max_path_len;
    layout.start = spec.start;
    for (int i = 0; i < n_wall; ++i) layout.walls.push_back(to_cell(order[i]));
    for (int k = 0; k < spec.num_goals; ++k) {
      layout.goals.push_back({to_cell(order[n_wall + k]), spec.goal_rewards[k]});
    }
    const NavTree probe(layout);
    bool ok = true;
    for (const auto& g : layout.goals) {
      const int d = probe.goal_distance(g.cell);
      if (d < 0 || d > spec.max_path_len) {
        ok = false;
        break;
      }
    }
    if (ok) return NavInstance{std::move(spec), std::move(layout)};
  }
  throw GenerationError("no wall layout with all goals reachable after " + std::to_string(kMaxAttempts) +
                        " attempts");
}

}  // namespace treebandit
