#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "core/errors.hpp"
#include "envs/instance.hpp"
#include "envs/nav_env.hpp"
#include "envs/tree_env.hpp"
#include "envs/value.hpp"

using namespace treebandit;

namespace {

// Oracle: count states by walking the generated tree.
std::size_t count_below(const SearchTree& t, StateId s) {
  std::size_t n = 0;
  for (StateId c : t.children(s)) n += 1 + count_below(t, c);
  return n;
}

// Oracle: V(root) as a sum over root-to-leaf paths of probability * reward.
double path_sum_value(const SearchTree& t, StateId s, double prob) {
  const auto& kids = t.children(s);
  if (kids.empty()) return prob * t.reward(s);
  double acc = 0.0;
  for (StateId c : kids) acc += path_sum_value(t, c, prob / static_cast<double>(kids.size()));
  return acc;
}

NavLayout fig11_layout() {
  NavLayout l;
  l.width = 2;
  l.height = 5;
  l.max_path_len = 8;
  l.start = {0, 0};
  l.walls = {{1, 2}, {1, 3}};
  l.goals = {{{1, 0}, 1.0}};
  return l;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("accessible state counts") {
  struct Case {
    int b, d;
    std::size_t expected;
  };
  for (const Case c : {Case{2, 6, 126}, Case{2, 8, 510}, Case{4, 4, 340}, Case{3, 3, 39}}) {
    TreeSpec spec;
    spec.branching = c.b;
    spec.depth = c.d;
    spec.num_goals = 2;
    const auto inst = generate_tree(spec);
    CHECK(count_below(inst.tree, inst.tree.root()) == c.expected);
    CHECK(accessible_state_count(c.b, c.d) == c.expected);
  }
}

TEST_CASE("tree goals are distinct leaves carrying the reward multiset") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    TreeSpec spec;
    spec.seed = seed;
    const auto inst = generate_tree(spec);
    std::multiset<double> rewards;
    std::size_t nonzero = 0;
    for (std::uint32_t s = 0; s < inst.tree.size(); ++s) {
      const double r = inst.tree.reward(StateId{s});
      if (r > 0) {
        ++nonzero;
        rewards.insert(r);
        CHECK(inst.tree.is_leaf(StateId{s}));
      }
    }
    CHECK(nonzero == 8);
    const auto def = default_goal_rewards(8);
    CHECK(rewards == std::multiset<double>(def.begin(), def.end()));
    CHECK(inst.tree.best_reward() == 1.0);
    CHECK(inst.tree.best_reward_path_length() == 6);
  }
  TreeSpec small;
  small.branching = 2;
  small.depth = 1;
  small.num_goals = 1;
  small.goal_rewards = {1.0};
  const auto inst = generate_tree(small);
  CHECK(inst.tree.reward(StateId{1}) + inst.tree.reward(StateId{2}) == 1.0);
  small.num_goals = 3;
  small.goal_rewards = {1.0, 0.5, 0.2};
  CHECK_THROWS_AS(generate_tree(small), ParameterError);
  small.num_goals = 2;
  small.goal_rewards = {0.5, 0.5};
  CHECK_THROWS_AS(generate_tree(small), ParameterError);
}

TEST_CASE("goal placement is uniform over leaves") {
  std::vector<int> hits(4, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    TreeSpec spec;
    spec.branching = 2;
    spec.depth = 2;
    spec.num_goals = 1;
    spec.seed = seed;
    ++hits[generate_tree(spec).goals[0].state.value - 3];
  }
  for (int h : hits) CHECK(std::abs(h - 1000) < 120);
}

TEST_CASE("true value equals explicit path summation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TreeSpec spec;
    spec.branching = 2 + static_cast<int>(seed % 2);
    spec.depth = 3 + static_cast<int>(seed % 3);
    spec.num_goals = 3;
    spec.seed = seed;
    const auto inst = generate_tree(spec);
    CHECK(true_value(inst.tree, inst.tree.root()) ==
          doctest::Approx(path_sum_value(inst.tree, inst.tree.root(), 1.0)).epsilon(1e-12));
  }
  // Depth-3 binary tree with goals at s8 and s11: V(root) = (r8 + r11) / 8.
  ExplicitTree t = ExplicitTree::perfect(2, 3);
  t.set_reward(StateId{8}, 1.0);
  t.set_reward(StateId{11}, 0.4);
  CHECK(true_value(t, StateId{0}) == doctest::Approx(1.4 / 8));
  CHECK(true_value(t, StateId{8}) == 1.0);
  CHECK(true_value(t, StateId{3}) == 0.5);
}

TEST_CASE("value estimates") {
  ExplicitTree t = ExplicitTree::perfect(2, 1);
  t.set_reward(StateId{2}, 0.4);
  RngStream rng(3, "est");
  for (int i = 0; i < 100; ++i) {
    const double v = estimate_value({1}, t, StateId{0}, rng);
    CHECK((v == 0.0 || v == 0.4));
    CHECK(estimate_value({5}, t, StateId{2}, rng) == 0.4);
  }
  // Hoeffding: with k = 10,000 and rewards in [0, 1], |err| < sqrt(ln(2/0.01) / (2k)) at 99%.
  TreeSpec spec;
  spec.seed = 9;
  spec.depth = 4;
  spec.num_goals = 4;
  const auto inst = generate_tree(spec);
  const double bound = std::sqrt(std::log(2.0 / 0.01) / (2.0 * 10000));
  RngStream r2(4, "hoeffding");
  for (std::uint32_t s : {0u, 1u, 2u, 5u}) {
    const double est = estimate_value({10000}, inst.tree, StateId{s}, r2);
    CHECK(std::abs(est - true_value(inst.tree, StateId{s})) < bound);
  }
}

TEST_CASE("navigation tree structure") {
  const NavTree nav(fig11_layout());
  const auto root_kids = nav.children(nav.root());
  REQUIRE(root_kids.size() == 2);
  CHECK(nav.cell_of(root_kids[0]) == Cell{0, 1});
  CHECK(nav.cell_of(root_kids[1]) == Cell{1, 0});
  // revisits allowed: x0y0>x0y1 has child x0y0>x0y1>x0y0
  const auto kids = nav.children(root_kids[0]);
  std::vector<Cell> cells;
  for (StateId k : kids) cells.push_back(nav.cell_of(k));
  CHECK(cells == std::vector<Cell>{{0, 2}, {0, 0}, {1, 1}});
  // goal terminal
  CHECK(nav.children(root_kids[1]).empty());
  CHECK(nav.reward(root_kids[1]) == 1.0);
  CHECK(nav.best_reward_path_length() == 1);
  CHECK(nav.path(kids[1]) == std::vector<Cell>{{0, 0}, {0, 1}, {0, 0}});
}

TEST_CASE("navigation successors respect every path rule on random walks") {
  NavSpec spec;
  spec.max_path_len = 12;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto inst = generate_nav(spec);
    const NavTree nav(inst.layout);
    RngStream rng(seed, "walk");
    for (int w = 0; w < 20; ++w) {
      StateId s = nav.root();
      for (;;) {
        const auto path = nav.path(s);
        CHECK(static_cast<int>(path.size()) - 1 <= spec.max_path_len);
        int goals_on_path = 0;
        for (std::size_t i = 0; i < path.size(); ++i) {
          CHECK_FALSE(nav.is_wall(path[i]));
          if (i > 0) CHECK(std::abs(path[i].x - path[i - 1].x) + std::abs(path[i].y - path[i - 1].y) == 1);
          if (nav.vertex_reward(path[i]) > 0) {
            ++goals_on_path;
            CHECK(i + 1 == path.size());
          }
        }
        CHECK(goals_on_path <= 1);
        const auto& kids = nav.children(s);
        if (kids.empty()) break;
        s = kids[rng.uniform_index(kids.size())];
      }
    }
  }
}

TEST_CASE("navigation generation") {
  NavSpec spec;  // 4x4, density 0.4
  spec.seed = 17;
  const auto inst = generate_nav(spec);
  CHECK(inst.layout.walls.size() == 6);
  CHECK(inst.layout.goals.size() == 3);
  const NavTree nav(inst.layout);
  for (const auto& g : inst.layout.goals) {
    const int d = nav.goal_distance(g.cell);
    CHECK(d >= 1);
    CHECK(d <= spec.max_path_len);
  }
  spec.width = 2;
  spec.height = 2;
  spec.wall_density = 0.5;
  CHECK_THROWS_AS(generate_nav(spec), ParameterError);
  // T = 1 with goals far away cannot be satisfied
  NavSpec far;
  far.width = 6;
  far.height = 6;
  far.wall_density = 0.0;
  far.num_goals = 8;
  far.max_path_len = 1;
  CHECK_THROWS_AS(generate_nav(far), GenerationError);
}

TEST_CASE("navigation true value matches rollout enumeration") {
  NavLayout l = fig11_layout();
  l.max_path_len = 4;
  const NavTree nav(l);
  CHECK(nav.true_value(nav.root()) == doctest::Approx(path_sum_value(nav, nav.root(), 1.0)).epsilon(1e-12));
  RngStream rng(2, "nav-rollouts");
  double sum = 0;
  for (int i = 0; i < 20000; ++i) sum += nav.rollout(nav.root(), rng);
  CHECK(std::abs(sum / 20000 - nav.true_value(nav.root())) < 0.02);
}

TEST_CASE("instance files regenerate bit-exactly") {
  TreeSpec ts;
  ts.seed = 99;
  const auto a = Instance::tree(ts);
  const auto b = Instance::from_json(a.to_json());
  CHECK(b.tree_instance()->goals == a.tree_instance()->goals);
  auto j = a.to_json();
  j["goals"][0]["state"] = j["goals"][0]["state"].get<int>() ^ 1;
  CHECK_THROWS_AS(Instance::from_json(j), ParseError);

  NavSpec ns;
  ns.seed = 5;
  const auto n = Instance::nav(ns);
  const auto m = Instance::from_json(n.to_json());
  CHECK(m.nav_instance()->layout.walls == n.nav_instance()->layout.walls);
  const auto e = Instance::nav_layout(fig11_layout());
  CHECK(Instance::from_json(e.to_json()).nav_instance()->layout.goals == e.nav_instance()->layout.goals);
}

}  // TEST_SUITE
