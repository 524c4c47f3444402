#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "envs/instance.hpp"
#include "envs/value.hpp"
#include "search/policy.hpp"

namespace treebandit {

/// Everything an experiment needs. Instance seeds, trace seeds and test
/// seeds are all derived from `seed`, so the config alone pins every output.
struct ExperimentConfig {
  Family family = Family::Tree;
  TreeSpec tree;  // seed unused
  NavSpec nav;    // seed unused
  std::vector<Policy> policies{make_policy(PolicyKind::UniformLeaf)};
  int budget = 50;
  ValueEstimator estimator;

  int n_train_instances = 200;  // split into train/val by train_fraction
  int traces_per_instance = 100;
  double train_fraction = 0.7;
  int n_test_instances = 10;
  int test_traces = 100;

  std::uint64_t seed = 0;
  /// Resamples evaluation noise without touching the instances.
  std::uint64_t eval_seed = 0;
  /// KL reference distribution: 0 for the analytic one, n > 0 for n sampled
  /// selections per step.
  int kl_samples = 0;
  int threads = 0;  // 0: hardware concurrency
  double timeout_s = 30.0;

  void validate() const;
  /// Number of corpus instances tagged train; the rest are val.
  int train_instance_count() const;

  nlohmann::json to_json() const;
  /// to_json with the run-time knobs (threads, timeout) at their defaults,
  /// for files that must not depend on the machine that wrote them.
  nlohmann::json recorded_json() const;
  /// Unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);

  /// Override one field by dotted key ("tree.depth", "budget", "policies").
  /// The value is read as JSON when it parses, else as a string; a
  /// comma-separated string is accepted for "policies".
  void set(const std::string& key, const std::string& value);
};

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct InstanceEntry {
  std::string id;  // "train-0003", "val-0000", "test-0009"
  Split split = Split::Train;
  Instance instance;
};

/// Corpus instances (train then val) followed by test instances. No two
/// entries share a layout: a seed whose instance repeats an earlier one is
/// skipped, which keeps the splits disjoint in content and not only in name.
std::vector<InstanceEntry> generate_instances(const ExperimentConfig& cfg);
std::vector<InstanceEntry> test_instances(const ExperimentConfig& cfg);

/// instances.json: the config plus every entry's instance document.
void save_instances(const std::string& path, const ExperimentConfig& cfg, const std::vector<InstanceEntry>& entries);
std::vector<InstanceEntry> load_instances(const std::string& path);

}  // namespace treebandit
