#include <doctest.h>

#include <cmath>
#include <set>

#include "core/errors.hpp"
#include "core/explicit_tree.hpp"
#include "envs/tree_env.hpp"
#include "hardattn/agent.hpp"
#include "metrics/metrics.hpp"
#include "search/run_search.hpp"
#include "tracecodec/theoretical.hpp"

using namespace treebandit;

namespace {

StepRecord visit(const SearchTree& t, std::uint32_t s, double v) { return StepRecord{StateId{s}, v, t.children(StateId{s})}; }

Policy path_policy(PolicyKind k, SuccessorRule rule) {
  Policy p = make_policy(k);
  p.successors = rule;
  return p;
}

void check_equal(const NextStateDistribution& model, const NextStateDistribution& ref) {
  REQUIRE(model.is_exact());
  REQUIRE(ref.is_exact());
  REQUIRE(model.support == ref.support);
  for (std::size_t i = 0; i < ref.support.size(); ++i) {
    INFO("state " << ref.support[i].value);
    CHECK(model.exact[i] == ref.exact[i]);
  }
  CHECK(model.exact_dead_end_mass == ref.exact_dead_end_mass);
}

/// Follows a reference run and compares the model's next-selection
/// distribution with the analytic one before every step.
int compare_along(const HardAttnModel& model, const Policy& policy, const SearchRun& run, bool hygiene = false) {
  ModelPolicy agent(model, run.trajectory.steps[0], hygiene);
  int compared = 0;
  for (std::size_t t = 1; t <= static_cast<std::size_t>(model.budget); ++t) {
    if (agent.state().frontier().empty()) break;
    check_equal(agent.distribution(), next_state_distribution(policy, agent.state(), DistributionMode::Analytic));
    ++compared;
    if (t >= run.trajectory.steps.size()) break;
    agent.record(run.trajectory.steps[t], run.paths[t]);
  }
  return compared;
}

TreeInstance small_tree(std::uint64_t seed) {
  TreeSpec spec;
  spec.branching = 2;
  spec.depth = 2 + static_cast<int>(seed % 3);
  spec.num_goals = 1 + static_cast<int>(seed % 3);
  spec.seed = seed;
  return generate_tree(spec);
}

}  // namespace

TEST_SUITE("hardattn") {

TEST_CASE("hardmax") {
  CHECK(hardmax(std::vector<double>{1, 3, 3}) == std::vector<double>{0, 0.5, 0.5});
  CHECK(hardmax(std::vector<double>{5}) == std::vector<double>{1});
  CHECK(hardmax(std::vector<Rational>(3, Rational(2))) == std::vector<Rational>(3, Rational(1, 3)));
  CHECK_THROWS_AS(hardmax(std::vector<double>{}), ParameterError);
}

TEST_CASE("leaf model dimension is 10 + TB") {
  CHECK(build_leaf_model(50, 2, PolicyKind::UniformLeaf).dimension() == 110);
  CHECK(build_leaf_model(1, 2, PolicyKind::GreedyLeaf).dimension() == 12);
  CHECK(build_leaf_model(7, 3, PolicyKind::GreedyLeaf).layers.size() == 3);
}

TEST_CASE("tree model layer counts and layout-derived dimension") {
  for (int t : {1, 5, 50}) {
    const int s = 2 * t + 1;
    const auto plain = build_tree_model(t, 2, path_policy(PolicyKind::PathUCT, SuccessorRule::Plain));
    CHECK(plain.layers.size() == 12);
    // 19 scalars, 8 per-state blocks, oid with two marker slots
    CHECK(plain.dimension() == 19 + 8 * s + s + 2);
    const auto star = build_tree_model(t, 2, path_policy(PolicyKind::PathUCT, SuccessorRule::Modified));
    CHECK(star.layers.size() == 14);
    CHECK(star.dimension() == 21 + 10 * s + s + 2);
  }
  CHECK_THROWS_AS(build_tree_model(5, 2, make_policy(PolicyKind::UniformLeaf)), ParameterError);
  CHECK_THROWS_AS(build_leaf_model(0, 2, PolicyKind::UniformLeaf), ParameterError);
}

TEST_CASE("attention weights are signed copy matrices") {
  std::vector<HardAttnModel> models{build_leaf_model(6, 2, PolicyKind::GreedyLeaf)};
  for (PolicyKind k : {PolicyKind::UniformPath, PolicyKind::PathPureExploration, PolicyKind::PathGreedy,
                       PolicyKind::PathUCT}) {
    models.push_back(build_tree_model(6, 2, path_policy(k, SuccessorRule::Plain)));
    models.push_back(build_tree_model(6, 2, path_policy(k, SuccessorRule::Modified)));
  }
  for (const auto& m : models) {
    for (const auto& l : m.layers) {
      for (const auto* terms : {&l.q, &l.k, &l.v}) {
        std::set<std::pair<int, int>> seen;
        for (const auto& t : *terms) {
          CHECK((t.coef == 1 || t.coef == -1));
          CHECK(seen.insert({t.src, t.dst}).second);
          CHECK(t.src >= 0);
          CHECK(t.src < m.dimension());
        }
      }
      for (const auto& t : l.v) CHECK(t.dst < m.dimension());
    }
  }
}

TEST_CASE("leaf model: frontier after the root step") {
  for (PolicyKind k : {PolicyKind::UniformLeaf, PolicyKind::GreedyLeaf}) {
    const auto m = build_leaf_model(3, 2, k);
    Session s(m, true);
    for (const char* tok : {"?", "S0", "%", "V0", "#", "S1", "S2", "?"}) s.push(tok);
    const auto d = s.next();
    CHECK(d.support == std::vector<std::string>{"S1", "S2"});
    CHECK(d.probabilities == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
  }
}

TEST_CASE("greedy leaf model picks the child of the best parent") {
  const auto tree = ExplicitTree::perfect(2, 3);
  const auto m = build_leaf_model(4, 2, PolicyKind::GreedyLeaf);
  ModelPolicy agent(m, visit(tree, 0, 0.0));
  agent.record(visit(tree, 1, 0.2), {StateId{0}, StateId{1}});
  agent.record(visit(tree, 2, 0.7), {StateId{0}, StateId{2}});
  const auto d = agent.distribution();
  CHECK(d.probability_of(StateId{5}) == 0.5);
  CHECK(d.probability_of(StateId{6}) == 0.5);
  CHECK(d.probability_of(StateId{3}) == 0.0);
}

TEST_CASE("unused state slots do not change the output") {
  const auto tree = ExplicitTree::perfect(2, 3);
  const auto small = build_leaf_model(4, 2, PolicyKind::GreedyLeaf);
  const auto large = build_leaf_model(12, 2, PolicyKind::GreedyLeaf);
  ModelPolicy a(small, visit(tree, 0, 0.0)), b(large, visit(tree, 0, 0.0));
  for (auto [s, v] : {std::pair{2u, 0.3}, std::pair{1u, 0.3}, std::pair{6u, 0.0}}) {
    a.record(visit(tree, s, v), {});
    b.record(visit(tree, s, v), {});
    CHECK(a.distribution().exact == b.distribution().exact);
  }
}

TEST_CASE("tree model emits the root after [BOS] ?") {
  for (PolicyKind k : {PolicyKind::UniformPath, PolicyKind::PathPureExploration, PolicyKind::PathGreedy,
                       PolicyKind::PathUCT}) {
    const auto m = build_tree_model(4, 2, path_policy(k, SuccessorRule::Plain));
    Session s(m, true);
    s.push("[BOS]");
    s.push("?");
    const auto d = s.next();
    CHECK(d.support == std::vector<std::string>{"S0"});
    s.push("S0");
    CHECK(s.next().support == std::vector<std::string>{"%"});
  }
}

TEST_CASE("pure exploration takes the untouched branch") {
  // Two iterations went down the left branch (0 > 1, then 0 > 1 > 3).
  const auto tree = ExplicitTree::perfect(2, 2);
  const auto m = build_tree_model(5, 2, path_policy(PolicyKind::PathPureExploration, SuccessorRule::Plain));
  ModelPolicy agent(m, visit(tree, 0, 0.0), true);
  agent.record(visit(tree, 1, 0.0), {StateId{0}, StateId{1}});
  agent.record(visit(tree, 3, 0.0), {StateId{0}, StateId{1}, StateId{3}});
  const auto d = agent.distribution();
  CHECK(d.probability_of(StateId{2}) == 1.0);
  // At the root: count(1) = 2 against an unvisited sibling.
  Session& s = agent.session();
  s.push("?");
  s.push("S0");
  CHECK(s.next().support == std::vector<std::string>{">"});
  s.push(">");
  CHECK(s.next().support == std::vector<std::string>{"S2"});
}

TEST_CASE("session tokens match the theoretical encoders") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = small_tree(seed);
    for (PolicyKind k : {PolicyKind::GreedyLeaf, PolicyKind::PathUCT}) {
      Policy p = make_policy(k);
      p.successors = SuccessorRule::Plain;
      SearchConfig cfg{10, p, {}};
      const auto run = run_search(inst.tree, cfg, RngStream(seed, "enc"));
      const auto model = build_model(10, 2, p);
      ModelPolicy agent(model, run.trajectory.steps[0]);
      for (std::size_t t = 1; t < run.trajectory.steps.size(); ++t) agent.record(run.trajectory.steps[t], run.paths[t]);
      const auto rec = k == PolicyKind::GreedyLeaf ? encode_leaf_theoretical(run.trajectory)
                                                   : encode_tree_theoretical(run.trajectory, run.paths);
      std::vector<std::string> words;
      for (const auto& tok : rec.tokens) words.push_back(tok.text);
      CHECK(agent.session().tokens() == words);
    }
  }
}

TEST_CASE("exact equivalence with the reference policies, N(s) convention") {
  // B = 2, D <= 4, T <= 15; 100 seeded trajectories per model.
  int compared = 0;
  for (PolicyKind k : kAllPolicyKinds) {
    Policy p = make_policy(k);
    p.successors = SuccessorRule::Plain;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto inst = small_tree(seed);
      const int budget = 5 + static_cast<int>(seed % 11);
      const auto model = build_model(budget, 2, p);
      const SearchConfig cfg{budget, p, {}};
      const auto run = run_search(inst.tree, cfg, RngStream(seed, "equivalence"));
      compared += compare_along(model, p, run, seed < 3);
    }
  }
  CHECK(compared > 4000);
}

TEST_CASE("exact equivalence with the reference policies, N* convention") {
  for (PolicyKind k : {PolicyKind::UniformPath, PolicyKind::PathPureExploration, PolicyKind::PathGreedy,
                       PolicyKind::PathUCT}) {
    const Policy p = make_policy(k);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto inst = small_tree(seed + 500);
      const int budget = 15;
      const auto model = build_model(budget, 2, p);
      const auto run = run_search(inst.tree, SearchConfig{budget, p, {}}, RngStream(seed, "star"));
      compare_along(model, p, run, seed < 2);
    }
  }
}

TEST_CASE("N(s) dead end shows up as invalid mass") {
  // Root 0 with children 1 (leaf) and 2 (with children 3, 4).
  ExplicitTree tree({{StateId{1}, StateId{2}}, {}, {StateId{3}, StateId{4}}, {}, {}}, {0, 0, 0, 0, 0.5});
  const Policy p = path_policy(PolicyKind::UniformPath, SuccessorRule::Plain);
  const auto m = build_tree_model(4, 2, p);
  ModelPolicy agent(m, visit(tree, 0, 0.0), true);
  agent.record(visit(tree, 1, 0.0), {StateId{0}, StateId{1}});
  const auto d = agent.distribution();
  CHECK(d.exact_dead_end_mass == Rational(1, 2));
  CHECK(d.probability_of(StateId{2}) == 0.5);
}

TEST_CASE("rollout with the model") {
  const auto tree = ExplicitTree::perfect(2, 3);
  const auto m = build_leaf_model(14, 2, PolicyKind::UniformLeaf);
  const auto run = rollout_with_model(m, tree, {}, 14, RngStream(3, "roll"));
  CHECK(run.trajectory.steps.size() == 15);
  CHECK_NOTHROW(validate_trajectory(run.trajectory, tree));
  std::set<std::uint32_t> seen;
  for (const auto& s : run.trajectory.steps) seen.insert(s.state.value);
  CHECK(seen.size() == 15);

  // Every step of a model-driven run matches the reference distribution.
  for (PolicyKind k : kAllPolicyKinds) {
    Policy p = make_policy(k);
    const auto inst = small_tree(static_cast<std::uint64_t>(k) + 40);
    const auto model = build_model(12, 2, p);
    const auto r = rollout_with_model(model, inst.tree, {}, 12, RngStream(9, "roll"));
    CHECK_NOTHROW(validate_trajectory(r.trajectory, inst.tree));
    compare_along(model, p, r);
  }
}

TEST_CASE("constructed UCT agent matches reference UCT in metrics") {
  // 1000 model runs against 10000 reference runs on the same ten instances.
  // Six metrics are tested at once, so the band is Bonferroni-corrected to
  // a family-wise 5% level: z = Phi^-1(1 - 0.05 / 12) = 2.638.
  const double z = 2.638;
  const Policy p = make_policy(PolicyKind::PathUCT);
  const auto model = build_model(15, 2, p);
  std::vector<TreeInstance> instances;
  for (std::uint64_t i = 0; i < 10; ++i) {
    TreeSpec spec;
    spec.depth = 4;
    spec.num_goals = 4;
    spec.seed = i;
    instances.push_back(generate_tree(spec));
  }
  std::vector<RunOutcome> model_runs, ref_runs;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto& tree = instances[seed % 10].tree;
    model_runs.push_back(score_run(rollout_with_model(model, tree, {}, 15, RngStream(seed, "model-arm")).trajectory, tree));
  }
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto& tree = instances[seed % 10].tree;
    ref_runs.push_back(score_run(run_search(tree, SearchConfig{15, p, {}}, RngStream(seed, "reference-arm")).trajectory, tree));
  }
  const auto a = aggregate(model_runs), b = aggregate(ref_runs);
  for (Metric metric : kAllMetrics) {
    INFO(static_cast<int>(metric));
    const double se = std::hypot(a[metric].se95, b[metric].se95) / 1.96;
    CHECK(std::abs(a[metric].mean - b[metric].mean) <= z * se);
  }
}

TEST_CASE("text serialization round trip") {
  std::vector<HardAttnModel> models{build_leaf_model(5, 2, PolicyKind::UniformLeaf),
                                    build_leaf_model(5, 3, PolicyKind::GreedyLeaf)};
  Policy uct = make_policy(PolicyKind::PathUCT);
  uct.c = 0.37;
  models.push_back(build_tree_model(5, 2, uct));
  uct.successors = SuccessorRule::Plain;
  models.push_back(build_tree_model(5, 2, uct));
  const auto tree = ExplicitTree::perfect(2, 3);
  for (const auto& m : models) {
    const std::string text = m.to_text();
    const auto back = HardAttnModel::from_text(text);
    CHECK(back.to_text() == text);
    CHECK(back.dimension() == m.dimension());
    ModelPolicy a(m, visit(tree, 0, 0.0)), b(back, visit(tree, 0, 0.0));
    a.record(visit(tree, 1, 0.4), {StateId{0}, StateId{1}});
    b.record(visit(tree, 1, 0.4), {StateId{0}, StateId{1}});
    CHECK(a.distribution().exact == b.distribution().exact);
  }
  CHECK_THROWS_AS(HardAttnModel::from_text("garbage"), ParseError);
  std::string broken = models[0].to_text();
  broken.replace(broken.find("fn "), 3, "fx ");
  CHECK_THROWS_AS(HardAttnModel::from_text(broken), ParseError);
}

TEST_CASE("session errors") {
  const auto m = build_leaf_model(2, 2, PolicyKind::UniformLeaf);
  Session s(m);
  CHECK_THROWS_AS(s.push(">"), ParseError);
  CHECK_THROWS_AS(s.push("S5"), CapacityError);
  CHECK_THROWS_AS(s.next(), StructuralError);
  CHECK_THROWS_AS(s.pop(), StructuralError);
}

}  // TEST_SUITE
