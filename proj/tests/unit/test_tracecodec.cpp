#include <doctest.h>

#include <fstream>
#include <sstream>

#include "core/errors.hpp"
#include "envs/nav_env.hpp"
#include "envs/tree_env.hpp"
#include "search/run_search.hpp"
#include "tracecodec/empirical.hpp"
#include "tracecodec/names.hpp"
#include "tracecodec/theoretical.hpp"
#include "tracecodec/vocab.hpp"

using namespace treebandit;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(TB_TEST_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trajectory replay(const SearchTree& tree, const std::vector<std::size_t>& picks, const std::vector<double>& values) {
  Trajectory t;
  t.steps.push_back({tree.root(), 0.0, tree.children(tree.root())});
  Frontier f(t.steps.front());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const StateId s = f.members().at(picks[i]);
    t.steps.push_back({s, values[i], tree.children(s)});
    f.visit(t.steps.back());
  }
  return t;
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

TEST_SUITE("tracecodec") {

TEST_CASE("state names") {
  const auto t = ExplicitTree::perfect(3, 2);
  CHECK(state_name(t, t.root()) == "r0d0");
  CHECK(state_name(t, StateId{3}) == "r0d0>i2d1");
  CHECK(state_name(t, StateId{12}) == "r0d0>i2d1>i2d2");
  CHECK(resolve_state_name(t, "r0d0>i2d1>i0d2") == StateId{10});
  CHECK_THROWS_AS(resolve_state_name(t, "r0d0>i3d1"), ParseError);
  CHECK_THROWS_AS(resolve_state_name(t, "r0d0>i1d2"), ParseError);

  const NavTree nav(fig11_layout());
  const StateId a = nav.children(nav.root())[0];
  CHECK(state_name(nav, a) == "x0y0>x0y1");
  CHECK(split_path_name("x0y0>x0y1") == std::vector<std::string>{"x0y0", ">", "x0y1"});
  CHECK(resolve_state_name(nav, "x0y0>x0y1>x0y0") == nav.children(a)[1]);
}

TEST_CASE("value tokens round half up to two decimals") {
  CHECK(format_value(0.0) == "0.00");
  CHECK(format_value(1.0) == "1.00");
  CHECK(format_value(0.4) == "0.40");
  CHECK(format_value(0.125) == "0.13");
  CHECK(format_value(0.375) == "0.38");
  CHECK(format_value(0.994) == "0.99");
  CHECK(format_value(0.995) == "0.99");  // the double just below .995
  CHECK(format_value(0.9951) == "1.00");
  CHECK(parse_value_token("0.07") == 0.07);
  CHECK_THROWS_AS(parse_value_token("0.070"), ParseError);
  CHECK_THROWS_AS(parse_value_token("1.01"), ParseError);
}

TEST_CASE("golden: multi-reward tree trace") {
  const auto t = ExplicitTree::perfect(3, 3);
  const auto tr = replay(t, {2, 0, 6, 4, 9, 9}, {0.0, 0.0, 0.0, 0.4, 1.0, 0.0});
  const std::string golden = slurp("fig10_tree_trace.txt");
  CHECK(encode_empirical_text(tr, t) == golden);
  const auto back = decode_empirical(golden, t);
  CHECK(back == tr);
}

TEST_CASE("golden: multi-reward navigation trace") {
  const NavTree nav(fig11_layout());
  const auto tr = replay(nav, {0, 1, 3, 4, 4, 3}, {0.0, 0.1, 0.1, 0.0, 0.0, 0.0});
  const std::string golden = slurp("fig11_nav_trace.txt");
  CHECK(encode_empirical_text(tr, nav) == golden);
  CHECK(decode_empirical(golden, nav) == tr);
}

TEST_CASE("empirical round trip on random trajectories") {
  Policy policies[] = {make_policy(PolicyKind::UniformLeaf), make_policy(PolicyKind::PathUCT)};
  for (int i = 0; i < 1000; ++i) {
    TreeSpec spec;
    spec.branching = 2 + i % 3;
    spec.depth = 2 + i % 4;
    spec.num_goals = 2;
    spec.seed = static_cast<std::uint64_t>(i);
    const auto inst = generate_tree(spec);
    SearchConfig cfg;
    cfg.budget = 1 + i % 20;
    cfg.policy = policies[i % 2];
    const auto run = run_search(inst.tree, cfg, RngStream(static_cast<std::uint64_t>(i), "roundtrip"));
    const std::string text = encode_empirical_text(run.trajectory, inst.tree);
    const Trajectory back = decode_empirical(text, inst.tree);
    REQUIRE(back.steps.size() == run.trajectory.steps.size());
    for (std::size_t k = 1; k < back.steps.size(); ++k) {
      CHECK(back.steps[k].state == run.trajectory.steps[k].state);
      CHECK(format_value(back.steps[k].value) == format_value(run.trajectory.steps[k].value));
    }
    CHECK(encode_empirical_text(back, inst.tree) == text);
    // listed frontier is frontier_after(prefix) in canonical order
    const auto rec = encode_empirical(run.trajectory, inst.tree);
    std::size_t pos = 0;
    for (std::size_t k = 1; k < run.trajectory.steps.size(); ++k) {
      std::vector<StepRecord> prefix(run.trajectory.steps.begin(), run.trajectory.steps.begin() + k);
      const auto f = frontier_after(prefix);
      ++pos;  // start marker
      for (std::size_t m = 0; m < f.size(); ++m) {
        CHECK(rec.tokens[pos].text == std::to_string(m));
        CHECK(rec.tokens[pos + 1].text == state_name(inst.tree, f.members()[m]));
        pos += 2;
      }
      pos += 3;
    }
    CHECK(pos == rec.tokens.size());
  }
}

TEST_CASE("empirical decode errors") {
  const auto t = ExplicitTree::perfect(3, 3);
  const std::string golden = slurp("fig10_tree_trace.txt");
  std::string bad_index = golden;
  bad_index.replace(bad_index.find("reward 2"), 8, "reward 7");
  CHECK_THROWS_WITH_AS(decode_empirical(bad_index, t), doctest::Contains("out of range"), ParseError);
  const std::string truncated = golden.substr(0, golden.find("0.40"));
  CHECK_THROWS_WITH_AS(decode_empirical(truncated, t), doctest::Contains("iteration 4"), ParseError);
  std::string off_grid = golden;
  off_grid.replace(off_grid.find("0.40"), 4, "0.405");
  CHECK_THROWS_AS(decode_empirical(off_grid, t), ParseError);
  std::string unknown = golden;
  unknown.replace(unknown.find("r0d0>i1d1"), 9, "r0d0>i9d1");
  CHECK_THROWS_AS(decode_empirical(unknown, t), ParseError);
}

TEST_CASE("theoretical encodings") {
  const auto t = ExplicitTree::perfect(2, 3);
  const auto tr = replay(t, {0}, {0.25});
  const auto leaf = encode_leaf_theoretical(tr);
  CHECK(render(leaf) == "? S0 % V0 # S1 S2 ? S1 % V0.25 # S3 S4\n");
  std::size_t expected = 0;
  for (const auto& s : tr.steps) expected += 5 + s.children.size();  // ? S % V # then children
  CHECK(leaf.tokens.size() == expected);
  for (std::size_t i = 0; i + 1 < leaf.tokens.size(); ++i) {
    if (leaf.tokens[i].text == "%") CHECK(leaf.tokens[i + 1].kind == TokenKind::Value);
  }
  const auto tree_rec = encode_tree_theoretical(tr, {{StateId{0}}, {StateId{0}, StateId{1}}});
  CHECK(render(tree_rec) == "[BOS] ? S0 % V0 # S1 S2 ? S0 > S1 % V0.25 # S3 S4\n");
  CHECK_THROWS_AS(encode_tree_theoretical(tr, {{StateId{0}}, {StateId{0}, StateId{2}}}), StructuralError);
  CHECK(parse_theoretical_value(value_token(0.1)) == 0.1);
}

TEST_CASE("tree-based sequences stay within a quadratic bound") {
  for (int i = 0; i < 50; ++i) {
    TreeSpec spec;
    spec.seed = static_cast<std::uint64_t>(i);
    spec.depth = 6;
    const auto inst = generate_tree(spec);
    SearchConfig cfg;
    cfg.budget = 10 + i;
    cfg.policy = make_policy(PolicyKind::PathUCT);
    const auto run = run_search(inst.tree, cfg, RngStream(1, "quad").split(static_cast<std::uint64_t>(i)));
    const auto rec = encode_tree_theoretical(run.trajectory, run.paths);
    const std::size_t T = run.trajectory.selections();
    // path length <= min(D, t) per step, B children, 4 markers/values per step
    std::size_t bound = 1;
    for (std::size_t k = 0; k <= T; ++k) bound += 1 + (2 * std::min<std::size_t>(k, 6) + 1) + 3 + 2;
    CHECK(rec.tokens.size() <= bound);
    CHECK(rec.tokens.size() <= 1 + (T + 1) * (T + 1) * 2 + (T + 1) * 6);
  }
}

TEST_CASE("vocabularies are bijective and cover encoded records") {
  for (const Vocab& v : {Vocab::empirical_tree(2, 6, 50), Vocab::empirical_nav(4, 4, 50),
                         Vocab::leaf_theoretical(50, 2), Vocab::tree_theoretical(15, 2)}) {
    for (int id = 0; id < static_cast<int>(v.size()); ++id) CHECK(v.id(v.token(id)) == id);
    CHECK(Vocab::from_json(v.to_json()).tokens() == v.tokens());
  }
  const auto v = Vocab::empirical_tree(3, 3, 6);
  const auto t = ExplicitTree::perfect(3, 3);
  const auto rec = encode_empirical(replay(t, {2, 0, 6, 4, 9, 9}, {0.0, 0.0, 0.0, 0.4, 1.0, 0.0}), t);
  CHECK(v.encode(rec).size() == rec.tokens.size());

  const NavTree nav(fig11_layout());
  const auto nv = Vocab::empirical_nav(2, 5, 6);
  const auto nrec = encode_empirical(replay(nav, {0, 1, 3, 4, 4, 3}, {0.0, 0.1, 0.1, 0.0, 0.0, 0.0}), nav);
  const auto ids = nv.encode(nrec);
  CHECK(ids.size() > nrec.tokens.size());
  CHECK(nv.token(ids[2]) == "x0y0");
  CHECK(nv.token(ids[3]) == ">");
}

}  // TEST_SUITE
