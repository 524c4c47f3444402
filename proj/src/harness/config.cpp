#include "harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "core/errors.hpp"

namespace treebandit {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {"family",      "tree",       "nav",        "policies",
                                        "budget",      "rollouts",   "train_instances",
                                        "traces_per_instance",       "train_fraction",
                                        "test_instances", "test_traces", "seed", "eval_seed", "kl_samples", "threads", "timeout"};
const std::set<std::string> kTreeKeys = {"branching", "depth", "goals", "goal_rewards"};
const std::set<std::string> kNavKeys = {"width", "height", "wall_density", "goals", "goal_rewards", "max_path_len",
                                        "start"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw ParameterError("unknown config key '" + where + k + "'");
  }
}

void positive(int v, const char* what) {
  if (v < 1) throw ParameterError(std::string(what) + " must be at least 1");
}

}  // namespace

void ExperimentConfig::validate() const {
  positive(budget, "budget");
  positive(estimator.rollouts, "rollouts");
  positive(n_train_instances, "train_instances");
  positive(traces_per_instance, "traces_per_instance");
  positive(n_test_instances, "test_instances");
  positive(test_traces, "test_traces");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ParameterError("train_fraction must be in (0, 1]");
  if (threads < 0) throw ParameterError("threads must be non-negative");
  if (!(timeout_s > 0.0)) throw ParameterError("timeout must be positive");
  if (kl_samples < 0) throw ParameterError("kl_samples must be non-negative");
  if (policies.empty()) throw ParameterError("at least one policy is required");
  if (family == Family::Tree) {
    if (tree.branching < 1 || tree.depth < 1) throw ParameterError("tree branching and depth must be at least 1");
  } else if (nav.width < 1 || nav.height < 1 || nav.max_path_len < 1) {
    throw ParameterError("maze width, height and max_path_len must be at least 1");
  }
}

int ExperimentConfig::train_instance_count() const {
  return static_cast<int>(std::lround(train_fraction * n_train_instances));
}

json ExperimentConfig::to_json() const {
  json pols = json::array();
  for (const auto& p : policies) pols.push_back(policy_name(p));
  return {{"family", family_name(family)},
          {"tree",
           {{"branching", tree.branching},
            {"depth", tree.depth},
            {"goals", tree.num_goals},
            {"goal_rewards", tree.goal_rewards}}},
          {"nav",
           {{"width", nav.width},
            {"height", nav.height},
            {"wall_density", nav.wall_density},
            {"goals", nav.num_goals},
            {"goal_rewards", nav.goal_rewards},
            {"max_path_len", nav.max_path_len},
            {"start", {nav.start.x, nav.start.y}}}},
          {"policies", pols},
          {"budget", budget},
          {"rollouts", estimator.rollouts},
          {"train_instances", n_train_instances},
          {"traces_per_instance", traces_per_instance},
          {"train_fraction", train_fraction},
          {"test_instances", n_test_instances},
          {"test_traces", test_traces},
          {"seed", seed},
          {"eval_seed", eval_seed},
          {"kl_samples", kl_samples},
          {"threads", threads},
          {"timeout", timeout_s}};
}

json ExperimentConfig::recorded_json() const {
  ExperimentConfig c = *this;
  const ExperimentConfig defaults;
  c.threads = defaults.threads;
  c.timeout_s = defaults.timeout_s;
  return c.to_json();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j, kTopKeys, "");
  ExperimentConfig c;
  try {
    if (j.contains("family")) c.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("tree")) {
      const json& t = j.at("tree");
      check_keys(t, kTreeKeys, "tree.");
      c.tree.branching = t.value("branching", c.tree.branching);
      c.tree.depth = t.value("depth", c.tree.depth);
      c.tree.num_goals = t.value("goals", c.tree.num_goals);
      c.tree.goal_rewards = t.value("goal_rewards", c.tree.goal_rewards);
    }
    if (j.contains("nav")) {
      const json& n = j.at("nav");
      check_keys(n, kNavKeys, "nav.");
      c.nav.width = n.value("width", c.nav.width);
      c.nav.height = n.value("height", c.nav.height);
      c.nav.wall_density = n.value("wall_density", c.nav.wall_density);
      c.nav.num_goals = n.value("goals", c.nav.num_goals);
      c.nav.goal_rewards = n.value("goal_rewards", c.nav.goal_rewards);
      c.nav.max_path_len = n.value("max_path_len", c.nav.max_path_len);
      if (n.contains("start")) {
        const auto xy = n.at("start").get<std::vector<int>>();
        if (xy.size() != 2) throw ParameterError("nav.start must be [x, y]");
        c.nav.start = Cell{xy[0], xy[1]};
      }
    }
    if (j.contains("policies")) {
      c.policies.clear();
      for (const auto& p : j.at("policies")) c.policies.push_back(parse_policy(p.get<std::string>()));
    }
    c.budget = j.value("budget", c.budget);
    c.estimator.rollouts = j.value("rollouts", c.estimator.rollouts);
    c.n_train_instances = j.value("train_instances", c.n_train_instances);
    c.traces_per_instance = j.value("traces_per_instance", c.traces_per_instance);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.n_test_instances = j.value("test_instances", c.n_test_instances);
    c.test_traces = j.value("test_traces", c.test_traces);
    c.seed = j.value("seed", c.seed);
    c.eval_seed = j.value("eval_seed", c.eval_seed);
    c.kl_samples = j.value("kl_samples", c.kl_samples);
    c.threads = j.value("threads", c.threads);
    c.timeout_s = j.value("timeout", c.timeout_s);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  if (key == "policies" && v.is_string()) {
    json list = json::array();
    std::string cur;
    for (char ch : v.get<std::string>() + ",") {
      if (ch == ',') {
        if (!cur.empty()) list.push_back(cur);
        cur.clear();
      } else if (ch != ' ') {
        cur += ch;
      }
    }
    v = list;
  }
  json j = to_json();
  json* node = &j;
  std::string rest = key;
  for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
    const std::string head = rest.substr(0, dot);
    if (!node->contains(head) || !(*node)[head].is_object()) throw ParameterError("unknown config key '" + key + "'");
    node = &(*node)[head];
    rest = rest.substr(dot + 1);
  }
  if (!node->contains(rest)) throw ParameterError("unknown config key '" + key + "'");
  (*node)[rest] = v;
  *this = from_json(j);
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw ParseError("unknown split '" + std::string(name) + "'");
}

namespace {

Instance make_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.family == Family::Tree) {
    TreeSpec s = cfg.tree;
    s.seed = seed;
    return Instance::tree(s);
  }
  NavSpec s = cfg.nav;
  s.seed = seed;
  return Instance::nav(s);
}

// What makes two instances the same problem: the goal table, or the layout.
std::string fingerprint(const Instance& inst) {
  json j = inst.to_json();
  return inst.family() == Family::Tree ? j.at("goals").dump() : j.at("layout").dump();
}

std::string entry_id(Split s, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return std::string(split_name(s)) + "-" + buf;
}

void draw(const ExperimentConfig& cfg, std::string_view pool, int count, std::set<std::string>& seen,
          std::vector<Instance>& out) {
  const RngStream base = RngStream(cfg.seed, "instances").split(pool);
  const std::uint64_t limit = 100ULL * static_cast<std::uint64_t>(count) + 1000;
  std::uint64_t attempt = 0;
  while (static_cast<int>(out.size()) < count) {
    if (attempt == limit) {
      throw GenerationError("could not draw " + std::to_string(count) + " distinct " + std::string(pool) +
                            " instances; the instance space is too small");
    }
    RngStream r = base.split(attempt++);
    Instance inst = make_instance(cfg, r.next_u64());
    if (seen.insert(fingerprint(inst)).second) out.push_back(std::move(inst));
  }
}

}  // namespace

std::vector<InstanceEntry> generate_instances(const ExperimentConfig& cfg) {
  cfg.validate();
  // Test instances are drawn first so they do not depend on the corpus size.
  std::set<std::string> seen;
  std::vector<Instance> corpus, test;
  draw(cfg, "test", cfg.n_test_instances, seen, test);
  draw(cfg, "corpus", cfg.n_train_instances, seen, corpus);
  const int n_train = cfg.train_instance_count();
  std::vector<InstanceEntry> out;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    const Split s = i < n_train ? Split::Train : Split::Val;
    out.push_back({entry_id(s, s == Split::Train ? i : i - n_train), s, std::move(corpus[static_cast<std::size_t>(i)])});
  }
  for (int i = 0; i < static_cast<int>(test.size()); ++i) {
    out.push_back({entry_id(Split::Test, i), Split::Test, std::move(test[static_cast<std::size_t>(i)])});
  }
  return out;
}

std::vector<InstanceEntry> test_instances(const ExperimentConfig& cfg) {
  cfg.validate();
  std::set<std::string> seen;
  std::vector<Instance> test;
  draw(cfg, "test", cfg.n_test_instances, seen, test);
  std::vector<InstanceEntry> out;
  for (int i = 0; i < static_cast<int>(test.size()); ++i) {
    out.push_back({entry_id(Split::Test, i), Split::Test, std::move(test[static_cast<std::size_t>(i)])});
  }
  return out;
}

void save_instances(const std::string& path, const ExperimentConfig& cfg, const std::vector<InstanceEntry>& entries) {
  json list = json::array();
  for (const auto& e : entries) {
    list.push_back({{"id", e.id}, {"split", split_name(e.split)}, {"instance", e.instance.to_json()}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << json{{"config", cfg.recorded_json()}, {"instances", list}}.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<InstanceEntry> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    in >> j;
    std::vector<InstanceEntry> out;
    for (const auto& e : j.at("instances")) {
      out.push_back({e.at("id").get<std::string>(), parse_split(e.at("split").get<std::string>()),
                     Instance::from_json(e.at("instance"))});
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace treebandit
