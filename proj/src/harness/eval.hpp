#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "harness/config.hpp"
#include "hardattn/model.hpp"
#include "metrics/metrics.hpp"

namespace treebandit {

/// Who makes the selections during evaluation.
struct AgentSpec {
  enum class Kind {
    Policy,     // internal reference policy
    Model,      // constructed hard-attention model, built per (T, B)
    ModelFile,  // constructed model loaded from a file
    Command,    // external process speaking the wire protocol on stdin/stdout
    Listen,     // external agent that connects over TCP
  };
  Kind kind = Kind::Policy;
  Policy policy;
  std::string path;     // ModelFile
  std::string command;  // Command
  std::string host = "127.0.0.1";
  int port = 0;  // Listen

  /// "uniform-leaf", "policy:<p>", "model:<p>", "model-file:<path>",
  /// "cmd:<shell command>", "listen:<port>" or "listen:<host>:<port>".
  static AgentSpec parse(const std::string& text);
  std::string describe() const;
};

struct RunRow {
  std::string instance_id;
  int trace = 0;
  /// ok, exhausted, or why the run failed (dead-end, illegal, timeout, ...).
  std::string status;
  RunOutcome outcome;
};

struct EvalResult {
  MetricVector metrics;
  std::vector<RunRow> runs;
  std::size_t failed() const;
};

/// Test instances x test_traces runs. Run k on instance `id` draws from
/// RngStream(seed, "eval").split(eval_seed).split(id).split(k) whatever the
/// agent, so value noise is fresh per trace and shared across agents.
/// Failed runs score as misses.
EvalResult run_eval(const ExperimentConfig& cfg, const AgentSpec& agent);

/// "instance,trace,status,hit_iter,hit_rate,dcg,...".
void write_runs_csv(std::ostream& out, const std::vector<RunRow>& runs);

enum class SweepAxis { Budget, Depth, Goals, WallDensity };
std::string_view axis_name(SweepAxis a);
SweepAxis parse_axis(std::string_view name);

struct SweepRow {
  SweepAxis axis = SweepAxis::Budget;
  double value = 0.0;
  /// The value equals the config's own setting (the one a trained agent saw).
  bool in_training = false;
  MetricVector metrics;
  std::size_t failed = 0;
};

/// One run_eval per value with the axis overridden; throws ParameterError
/// when the axis does not exist for the family.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const AgentSpec& agent, SweepAxis axis,
                            const std::vector<double>& values);
/// "axis,value,in_training,failed,metric,mean,std,se95".
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct KlPoint {
  int step = 0;  // selection index, 1-based
  double mean = 0.0;
  double se95 = 0.0;
  std::size_t samples = 0;
  std::size_t smoothed = 0;  // how many terms hit the probability floor
};

/// Per-step KL(reference || candidate) along trajectories sampled from the
/// reference policy on the test instances (test_traces per instance). The
/// reference side is analytic, or sampled when cfg.kl_samples > 0. The
/// candidate must expose distributions: an internal policy or a
/// constructed model.
std::vector<KlPoint> kl_eval(const ExperimentConfig& cfg, const Policy& reference, const AgentSpec& candidate);
/// "step,mean_kl,se95,samples,smoothed".
void write_kl_csv(std::ostream& out, const std::vector<KlPoint>& curve);

}  // namespace treebandit
