// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "../support/reference_oracle.hpp"
#include "envs/nav_env.hpp"
#include "envs/tree_env.hpp"
#include "hardattn/agent.hpp"
#include "harness/eval.hpp"
#include "metrics/metrics.hpp"
#include "search/run_search.hpp"
#include "tracecodec/empirical.hpp"

using namespace treebandit;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

TreeInstance small_tree(std::uint64_t seed, int min_depth = 2) {
  TreeSpec spec;
  spec.branching = 2;
  spec.depth = min_depth + static_cast<int>(seed % static_cast<std::uint64_t>(5 - min_depth));
  spec.num_goals = 1 + static_cast<int>(seed % 3);
  spec.seed = seed;
  return generate_tree(spec);
}

bool same_distribution(const NextStateDistribution& a, const NextStateDistribution& b) {
  return a.is_exact() && b.is_exact() && a.support == b.support && a.exact == b.exact &&
         a.exact_dead_end_mass == b.exact_dead_end_mass;
}

Verdict exact_equivalence() {
  long compared = 0, mismatched = 0;
  for (PolicyKind k : kAllPolicyKinds) {
    Policy p = make_policy(k);
    p.successors = SuccessorRule::Plain;  // path models are built for the N(s) walk
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto inst = small_tree(seed);
      const int budget = 5 + static_cast<int>(seed % 11);
      const HardAttnModel model = build_model(budget, 2, p);
      const auto run = run_search(inst.tree, SearchConfig{budget, p, {}}, RngStream(seed, "acceptance-equivalence"));
      ModelPolicy agent(model, run.trajectory.steps[0]);
      for (std::size_t t = 1; t <= static_cast<std::size_t>(budget); ++t) {
        if (agent.state().frontier().empty()) break;
        ++compared;
        if (!same_distribution(agent.distribution(),
                               next_state_distribution(p, agent.state(), DistributionMode::Analytic))) {
          ++mismatched;
        }
        if (t >= run.trajectory.steps.size()) break;
        agent.record(run.trajectory.steps[t], run.paths[t]);
      }
    }
  }
  return {compared > 0 && mismatched == 0,
          fmt("6 models x 100 trajectories, %ld steps compared, %ld mismatched", compared, mismatched)};
}

Verdict leaf_dimension() {
  const int leaf = build_leaf_model(50, 2, PolicyKind::UniformLeaf).dimension();
  const HardAttnModel tree = build_tree_model(50, 2, make_policy(PolicyKind::PathUCT));
  Policy plain = make_policy(PolicyKind::PathUCT);
  plain.successors = SuccessorRule::Plain;
  const int tree_plain = build_tree_model(50, 2, plain).dimension();
  return {leaf == 110, fmt("leaf d=%d (10+TB=110); tree model d=%d N*, d=%d N(s), layout-derived, no closed form given",
                           leaf, tree.dimension(), tree_plain)};
}

Verdict state_counts() {
  struct Case {
    int b, d;
    std::size_t expected;
  };
  bool ok = true;
  std::string detail;
  for (const Case c : {Case{2, 6, 126}, Case{2, 8, 510}, Case{4, 4, 340}}) {
    TreeSpec spec;
    spec.branching = c.b;
    spec.depth = c.d;
    spec.num_goals = 2;
    const auto inst = generate_tree(spec);
    // enumerate everything below the root
    std::size_t n = 0;
    std::vector<StateId> stack{inst.tree.root()};
    while (!stack.empty()) {
      const StateId s = stack.back();
      stack.pop_back();
      for (StateId ch : inst.tree.children(s)) {
        ++n;
        stack.push_back(ch);
      }
    }
    ok = ok && n == c.expected && accessible_state_count(c.b, c.d) == c.expected;
    detail += fmt("(%d,%d)->%zu ", c.b, c.d, n);
  }
  return {ok, detail + "expected 126, 510, 340"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
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

Verdict golden_traces() {
  const std::string dir = TB_TEST_DATA_DIR;
  const auto tree = ExplicitTree::perfect(3, 3);
  const bool fig10 = encode_empirical_text(replay(tree, {2, 0, 6, 4, 9, 9}, {0.0, 0.0, 0.0, 0.4, 1.0, 0.0}), tree) ==
                     slurp(dir + "/fig10_tree_trace.txt");
  NavLayout l;
  l.width = 2;
  l.height = 5;
  l.max_path_len = 8;
  l.start = {0, 0};
  l.walls = {{1, 2}, {1, 3}};
  l.goals = {{{1, 0}, 1.0}};
  const NavTree nav(l);
  const bool fig11 = encode_empirical_text(replay(nav, {0, 1, 3, 4, 4, 3}, {0.0, 0.1, 0.1, 0.0, 0.0, 0.0}), nav) ==
                     slurp(dir + "/fig11_nav_trace.txt");
  return {fig10 && fig11, fmt("tree trace %s, navigation trace %s", fig10 ? "identical" : "differs",
                              fig11 ? "identical" : "differs")};
}

RunOutcome hit_at(int iter) {
  RunOutcome o;
  o.hit = true;
  o.hit_iter = iter;
  o.found_path_len = 3;
  o.truth_path_len = 3;
  o.rewards = {1.0};
  return o;
}

Verdict metric_identities() {
  long runs = 0, per_run_mismatch = 0;
  std::vector<RunOutcome> outcomes;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    TreeSpec spec;  // B=2, D=6, eight goals with distinct rewards
    spec.seed = seed;
    const auto inst = generate_tree(spec);
    SearchConfig cfg;
    cfg.policy = make_policy(kAllPolicyKinds[seed % 6]);
    const RunOutcome o = score_run(run_search(inst.tree, cfg, RngStream(seed, "acceptance-metrics")).trajectory, inst.tree);
    const auto m = run_metrics(o);
    if (m[static_cast<std::size_t>(Metric::NormPathLen)] != m[static_cast<std::size_t>(Metric::HitRate)]) ++per_run_mismatch;
    outcomes.push_back(o);
    ++runs;
  }
  const MetricVector v = aggregate(outcomes);
  const bool same = per_run_mismatch == 0 && v[Metric::NormPathLen].mean == v[Metric::HitRate].mean &&
                    v[Metric::NormPathLen].std == v[Metric::HitRate].std;
  const double dcg1 = aggregate({hit_at(1)})[Metric::Dcg].mean;
  const double dcg3 = aggregate({hit_at(3)})[Metric::Dcg].mean;
  return {same && dcg1 == 1.0 && dcg3 == 0.5,
          fmt("%ld runs, norm path len == hit rate (%.4f == %.4f); DCG hit@1=%g hit@3=%g", runs,
              v[Metric::NormPathLen].mean, v[Metric::HitRate].mean, dcg1, dcg3)};
}

oracle::Kind oracle_kind(PolicyKind k) {
  switch (k) {
    case PolicyKind::UniformLeaf: return oracle::Kind::UniformLeaf;
    case PolicyKind::GreedyLeaf: return oracle::Kind::GreedyLeaf;
    case PolicyKind::UniformPath: return oracle::Kind::UniformPath;
    case PolicyKind::PathPureExploration: return oracle::Kind::PureExploration;
    case PolicyKind::PathGreedy: return oracle::Kind::Greedy;
    case PolicyKind::PathUCT: return oracle::Kind::UCT;
  }
  return oracle::Kind::UniformLeaf;
}

Verdict oracle_tv() {
  constexpr int kSamples = 10000;
  double worst = 0.0;
  long steps = 0;
  for (PolicyKind k : kAllPolicyKinds) {
    const Policy p = make_policy(k);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      TreeSpec spec;  // 15 or 13 states
      spec.branching = seed % 2 == 0 ? 2 : 3;
      spec.depth = seed % 2 == 0 ? 3 : 2;
      spec.num_goals = 2;
      spec.seed = seed;
      const auto inst = generate_tree(spec);
      SearchConfig cfg{14, p, {}};
      cfg.estimator.rollouts = 1 + static_cast<int>(seed % 3);
      const auto run = run_search(inst.tree, cfg, RngStream(seed, "acceptance-tv-prefix"));
      const auto& all = run.trajectory.steps;
      for (std::size_t n = 1; n <= all.size(); ++n) {
        const std::vector<StepRecord> prefix(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
        std::vector<oracle::Visit> visits;
        for (const auto& s : prefix) visits.push_back({s.state, s.value});
        const oracle::Oracle o(inst.tree, visits, true, p.c);
        if (o.frontier().empty()) break;
        const auto ref = o.distribution(oracle_kind(k));
        const RngStream rng(seed, "acceptance-tv-samples");
        const auto emp = next_state_distribution(p, prefix, DistributionMode::Empirical, kSamples, &rng);
        std::map<std::uint32_t, double> diff;
        for (const auto& [s, q] : ref.mass) diff[s] -= q.to_double();
        for (std::size_t i = 0; i < emp.support.size(); ++i) diff[emp.support[i].value] += emp.probabilities[i];
        double tv = std::abs(emp.dead_end_mass - ref.dead_end.to_double());
        for (const auto& [s, d] : diff) tv += std::abs(d);
        worst = std::max(worst, tv / 2);
        ++steps;
      }
    }
  }
  return {steps > 0 && worst < 0.05, fmt("%ld steps x %d samples, worst TV %.4f (bound 0.05)", steps, kSamples, worst)};
}

Verdict ordering() {
  const ExperimentConfig cfg;  // B=2, D=6, K=8, T=50, 10 instances x 100 runs
  const MetricStat uniform = run_eval(cfg, AgentSpec::parse("uniform-leaf")).metrics[Metric::HitRate];
  const MetricStat greedy = run_eval(cfg, AgentSpec::parse("path-greedy")).metrics[Metric::HitRate];
  const MetricStat uct = run_eval(cfg, AgentSpec::parse("path-uct")).metrics[Metric::HitRate];
  const double floor = uniform.mean - uniform.se95;
  return {greedy.mean >= floor && uct.mean >= floor,
          fmt("hit rate uniform leaf %.3f +- %.3f, path greedy %.3f, path UCT %.3f (floor %.3f)", uniform.mean,
              uniform.se95, greedy.mean, uct.mean, floor)};
}

Verdict full_coverage() {
  long runs = 0, bad = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TreeSpec spec;
    spec.branching = 2 + static_cast<int>(seed % 3);
    spec.depth = 2 + static_cast<int>(seed % 2);
    spec.num_goals = 2;
    spec.seed = seed;
    const auto inst = generate_tree(spec);
    const int states = static_cast<int>(accessible_state_count(spec.branching, spec.depth)) + 1;
    for (PolicyKind k : kAllPolicyKinds) {
      for (int extra : {0, 3}) {
        const auto run = run_search(inst.tree, SearchConfig{states - 1 + extra, make_policy(k), {}},
                                    RngStream(seed, "acceptance-coverage"));
        std::set<std::uint32_t> seen;
        for (const auto& s : run.trajectory.steps) seen.insert(s.state.value);
        const RunOutcome o = score_run(run.trajectory, inst.tree);
        ++runs;
        if (!o.hit || static_cast<int>(seen.size()) != states ||
            static_cast<int>(run.trajectory.steps.size()) != states) {
          ++bad;
        }
      }
    }
  }
  return {bad == 0, fmt("%ld runs with T >= |S|-1, %ld missed the best reward or a state", runs, bad)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> checks[] = {
      {"exact equivalence of the six constructed models", exact_equivalence},
      {"leaf model dimension", leaf_dimension},
      {"accessible state counts", state_counts},
      {"golden empirical traces", golden_traces},
      {"metric identities", metric_identities},
      {"reference algorithms match the brute-force oracle", oracle_tv},
      {"qualitative ordering at B=2 D=6 K=8 T=50", ordering},
      {"full-coverage budget", full_coverage},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(checks)) - failed, std::size(checks));
  return failed == 0 ? 0 : 1;
}
