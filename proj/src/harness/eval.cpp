#include "harness/eval.hpp"

#include <cmath>
#include <iomanip>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"
#include "hardattn/agent.hpp"
#include "harness/parallel.hpp"
#include "harness/protocol.hpp"
#include "search/run_search.hpp"
#include "search/selection.hpp"

namespace treebandit {

namespace {

bool starts_with(const std::string& s, std::string_view p) { return s.compare(0, p.size(), p) == 0; }

int parse_port(const std::string& s) {
  try {
    std::size_t used = 0;
    const int p = std::stoi(s, &used);
    if (used != s.size() || p < 0 || p > 65535) throw std::out_of_range(s);
    return p;
  } catch (const std::exception&) {
    throw ParameterError("bad port '" + s + "'");
  }
}

HardAttnModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return HardAttnModel::from_text(ss.str());
}

std::shared_ptr<const HardAttnModel> model_for(const ExperimentConfig& cfg, const AgentSpec& a) {
  if (cfg.family != Family::Tree) throw UnsupportedModeError("constructed models run on tree instances only");
  if (a.kind == AgentSpec::Kind::Model) {
    return std::make_shared<const HardAttnModel>(build_model(cfg.budget, cfg.tree.branching, a.policy));
  }
  auto m = std::make_shared<const HardAttnModel>(load_model_file(a.path));
  if (m->budget < cfg.budget || m->branching < cfg.tree.branching) {
    throw ParameterError("model is built for T=" + std::to_string(m->budget) + ", B=" + std::to_string(m->branching) +
                         ", smaller than the experiment");
  }
  return m;
}

RngStream run_rng(const ExperimentConfig& cfg, const InstanceEntry& e, int k) {
  return RngStream(cfg.seed, "eval").split(cfg.eval_seed).split(e.id).split(static_cast<std::uint64_t>(k));
}

RunRow finish(const InstanceEntry& e, int k, std::string status, const Trajectory& t, const SearchTree& tree,
              bool failed) {
  RunRow row;
  row.instance_id = e.id;
  row.trace = k;
  row.status = std::move(status);
  row.outcome = failed ? failed_run(t, tree) : score_run(t, tree);
  return row;
}

RunRow internal_run(const ExperimentConfig& cfg, const AgentSpec& a, const HardAttnModel* model,
                    const InstanceEntry& e, int k) {
  const auto tree = e.instance.make_tree();
  const RngStream rng = run_rng(cfg, e, k);
  SearchRun run;
  if (model) {
    try {
      run = rollout_with_model(*model, *tree, cfg.estimator, cfg.budget, rng);
    } catch (const ProtocolError&) {
      return finish(e, k, "illegal", Trajectory{}, *tree, true);
    }
  } else {
    run = run_search(*tree, SearchConfig{cfg.budget, a.policy, cfg.estimator}, rng);
  }
  if (run.dead_end) return finish(e, k, "dead-end", run.trajectory, *tree, true);
  return finish(e, k, run.trajectory.exhausted ? "exhausted" : "ok", run.trajectory, *tree, false);
}

}  // namespace

AgentSpec AgentSpec::parse(const std::string& text) {
  AgentSpec a;
  if (starts_with(text, "policy:")) {
    a.policy = parse_policy(text.substr(7));
  } else if (starts_with(text, "model:")) {
    a.kind = Kind::Model;
    a.policy = parse_policy(text.substr(6));
  } else if (starts_with(text, "model-file:")) {
    a.kind = Kind::ModelFile;
    a.path = text.substr(11);
  } else if (starts_with(text, "cmd:")) {
    a.kind = Kind::Command;
    a.command = text.substr(4);
    if (a.command.empty()) throw ParameterError("empty agent command");
  } else if (starts_with(text, "listen:")) {
    a.kind = Kind::Listen;
    const std::string rest = text.substr(7);
    const auto colon = rest.rfind(':');
    if (colon != std::string::npos) {
      a.host = rest.substr(0, colon);
      a.port = parse_port(rest.substr(colon + 1));
    } else {
      a.port = parse_port(rest);
    }
  } else {
    a.policy = parse_policy(text);
  }
  return a;
}

std::string AgentSpec::describe() const {
  switch (kind) {
    case Kind::Policy:
      return "policy:" + policy_name(policy);
    case Kind::Model:
      return "model:" + policy_name(policy);
    case Kind::ModelFile:
      return "model-file:" + path;
    case Kind::Command:
      return "cmd:" + command;
    case Kind::Listen:
      return "listen:" + host + ":" + std::to_string(port);
  }
  return {};
}

std::size_t EvalResult::failed() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.outcome.failed ? 1 : 0;
  return n;
}

EvalResult run_eval(const ExperimentConfig& cfg, const AgentSpec& agent) {
  cfg.validate();
  const std::vector<InstanceEntry> tests = test_instances(cfg);
  const auto per = static_cast<std::size_t>(cfg.test_traces);
  EvalResult res;
  res.runs.resize(tests.size() * per);

  if (agent.kind == AgentSpec::Kind::Policy || agent.kind == AgentSpec::Kind::Model ||
      agent.kind == AgentSpec::Kind::ModelFile) {
    std::shared_ptr<const HardAttnModel> model;
    if (agent.kind != AgentSpec::Kind::Policy) model = model_for(cfg, agent);
    parallel_for(res.runs.size(), cfg.threads, [&](std::size_t i) {
      res.runs[i] = internal_run(cfg, agent, model.get(), tests[i / per], static_cast<int>(i % per));
    });
  } else {
    // External agents: one session at a time on one connection, reopened
    // after the agent drops out.
    std::unique_ptr<ChildProcess> proc;
    std::unique_ptr<TcpListener> listener;
    std::unique_ptr<FdChannel> conn;
    if (agent.kind == AgentSpec::Kind::Listen) listener = std::make_unique<TcpListener>(agent.host, agent.port);
    for (std::size_t i = 0; i < res.runs.size(); ++i) {
      const InstanceEntry& e = tests[i / per];
      const int k = static_cast<int>(i % per);
      LineChannel* ch = nullptr;
      if (agent.kind == AgentSpec::Kind::Command) {
        if (!proc) proc = std::make_unique<ChildProcess>(agent.command);
        ch = &proc->channel();
      } else {
        if (!conn) conn = listener->accept(cfg.timeout_s);
        ch = conn.get();
      }
      const auto tree = e.instance.make_tree();
      const ServeResult s = serve_session(*tree, cfg.budget, cfg.estimator, run_rng(cfg, e, k), *ch, cfg.timeout_s);
      res.runs[i] = finish(e, k, s.status, s.trajectory, *tree, s.failed());
      if (s.status == "disconnected" || s.status == "timeout") {
        proc.reset();
        conn.reset();
      }
    }
  }

  std::vector<RunOutcome> outcomes;
  outcomes.reserve(res.runs.size());
  for (const auto& r : res.runs) outcomes.push_back(r.outcome);
  res.metrics = aggregate(outcomes);
  return res;
}

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& runs) {
  out << "instance,trace,status,hit_iter" << std::setprecision(10);
  for (Metric m : kAllMetrics) out << ',' << metric_name(m);
  out << '\n';
  for (const auto& r : runs) {
    out << r.instance_id << ',' << r.trace << ',' << r.status << ',';
    if (r.outcome.hit_iter) out << *r.outcome.hit_iter;
    for (double v : run_metrics(r.outcome)) out << ',' << v;
    out << '\n';
  }
}

std::string_view axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Budget:
      return "budget";
    case SweepAxis::Depth:
      return "depth";
    case SweepAxis::Goals:
      return "goals";
    case SweepAxis::WallDensity:
      return "wall_density";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::Budget, SweepAxis::Depth, SweepAxis::Goals, SweepAxis::WallDensity}) {
    if (axis_name(a) == name) return a;
  }
  throw ParameterError("unknown sweep axis '" + std::string(name) + "'");
}

namespace {

int as_int(double v, SweepAxis a) {
  if (v != std::floor(v)) throw ParameterError(std::string(axis_name(a)) + " values must be integers");
  return static_cast<int>(v);
}

double axis_value(const ExperimentConfig& c, SweepAxis a) {
  switch (a) {
    case SweepAxis::Budget:
      return c.budget;
    case SweepAxis::Depth:
      return c.tree.depth;
    case SweepAxis::Goals:
      return c.family == Family::Tree ? c.tree.num_goals : c.nav.num_goals;
    case SweepAxis::WallDensity:
      return c.nav.wall_density;
  }
  return 0.0;
}

ExperimentConfig with_axis(ExperimentConfig c, SweepAxis a, double v) {
  switch (a) {
    case SweepAxis::Budget:
      c.budget = as_int(v, a);
      break;
    case SweepAxis::Depth:
      if (c.family != Family::Tree) throw ParameterError("depth sweeps apply to tree instances");
      c.tree.depth = as_int(v, a);
      break;
    case SweepAxis::Goals:
      if (c.family == Family::Tree) {
        c.tree.num_goals = as_int(v, a);
        c.tree.goal_rewards.clear();
      } else {
        c.nav.num_goals = as_int(v, a);
        c.nav.goal_rewards.clear();
      }
      break;
    case SweepAxis::WallDensity:
      if (c.family != Family::Nav) throw ParameterError("wall density sweeps apply to maze instances");
      c.nav.wall_density = v;
      break;
  }
  c.validate();
  return c;
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const AgentSpec& agent, SweepAxis axis,
                            const std::vector<double>& values) {
  if (values.empty()) throw ParameterError("sweep needs at least one value");
  std::vector<ExperimentConfig> cfgs;
  for (double v : values) cfgs.push_back(with_axis(cfg, axis, v));  // reject bad values before running anything
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const EvalResult r = run_eval(cfgs[i], agent);
    rows.push_back({axis, values[i], values[i] == axis_value(cfg, axis), r.metrics, r.failed()});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "axis,value,in_training,failed,metric,mean,std,se95\n" << std::setprecision(10);
  for (const auto& r : rows) {
    for (Metric m : kAllMetrics) {
      const MetricStat& s = r.metrics[m];
      out << axis_name(r.axis) << ',' << r.value << ',' << (r.in_training ? 1 : 0) << ',' << r.failed << ','
          << metric_name(m) << ',' << s.mean << ',' << s.std << ',' << s.se95 << '\n';
    }
  }
}

std::vector<KlPoint> kl_eval(const ExperimentConfig& cfg, const Policy& reference, const AgentSpec& candidate) {
  cfg.validate();
  if (candidate.kind == AgentSpec::Kind::Command || candidate.kind == AgentSpec::Kind::Listen) {
    throw UnsupportedModeError("the wire protocol carries selections, not distributions; KL needs an in-process candidate");
  }
  std::shared_ptr<const HardAttnModel> model;
  if (candidate.kind != AgentSpec::Kind::Policy) model = model_for(cfg, candidate);

  const std::vector<InstanceEntry> tests = test_instances(cfg);
  const auto per = static_cast<std::size_t>(cfg.test_traces);
  const auto T = static_cast<std::size_t>(cfg.budget);
  struct Terms {
    std::vector<double> kl;
    std::vector<char> smoothed;
  };
  std::vector<Terms> terms(tests.size() * per);
  parallel_for(terms.size(), cfg.threads, [&](std::size_t i) {
    const InstanceEntry& e = tests[i / per];
    const auto tree = e.instance.make_tree();
    const RngStream rng = RngStream(cfg.seed, "kl").split(cfg.eval_seed).split(e.id).split(static_cast<std::uint64_t>(i % per));
    const SearchRun run = run_search(*tree, SearchConfig{cfg.budget, reference, cfg.estimator}, rng);
    SearchState st(run.trajectory.steps[0]);
    std::optional<ModelPolicy> mp;
    if (model) mp.emplace(*model, run.trajectory.steps[0]);
    Terms& out = terms[i];
    // Step t predicts selection t from the first t-1 selections.
    for (std::size_t t = 1; t <= T && t <= run.trajectory.steps.size(); ++t) {
      if (t > 1) {
        const StepRecord& prev = run.trajectory.steps[t - 1];
        st.record(prev);
        if (mp) mp->record(prev, run.paths[t - 1]);
      }
      if (st.frontier().empty()) break;
      const RngStream sample_rng = rng.split("reference-samples").split(static_cast<std::uint64_t>(t));
      const NextStateDistribution p =
          cfg.kl_samples > 0
              ? next_state_distribution(reference, st, DistributionMode::Empirical, cfg.kl_samples, &sample_rng)
              : next_state_distribution(reference, st, DistributionMode::Analytic);
      const NextStateDistribution q =
          mp ? mp->distribution() : next_state_distribution(candidate.policy, st, DistributionMode::Analytic);
      const KlResult k = kl_divergence(p, q);
      out.kl.push_back(k.value);
      out.smoothed.push_back(k.smoothed ? 1 : 0);
    }
  });

  std::vector<KlPoint> curve;
  for (std::size_t t = 0; t < T; ++t) {
    KlPoint pt;
    pt.step = static_cast<int>(t + 1);
    double sum = 0.0, sq = 0.0;
    for (const auto& r : terms) {
      if (t >= r.kl.size()) continue;
      sum += r.kl[t];
      sq += r.kl[t] * r.kl[t];
      pt.samples += 1;
      pt.smoothed += static_cast<std::size_t>(r.smoothed[t]);
    }
    if (pt.samples == 0) break;
    const double n = static_cast<double>(pt.samples);
    pt.mean = sum / n;
    const double var = std::max(0.0, sq / n - pt.mean * pt.mean);
    pt.se95 = 1.96 * std::sqrt(var) / std::sqrt(n);
    curve.push_back(pt);
  }
  return curve;
}

void write_kl_csv(std::ostream& out, const std::vector<KlPoint>& curve) {
  out << "step,mean_kl,se95,samples,smoothed\n" << std::setprecision(10);
  for (const auto& p : curve) {
    out << p.step << ',' << p.mean << ',' << p.se95 << ',' << p.samples << ',' << p.smoothed << '\n';
  }
}

}  // namespace treebandit
