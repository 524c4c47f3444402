#include "treebandit/treebandit.h"

#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "core/errors.hpp"
#include "hardattn/model.hpp"
#include "harness/config.hpp"
#include "harness/corpus.hpp"
#include "harness/eval.hpp"
#include "harness/protocol.hpp"

struct tb_config {
  treebandit::ExperimentConfig cfg;
};

struct tb_model {
  treebandit::HardAttnModel model;
};

namespace {

using namespace treebandit;

thread_local std::string g_last_error;

template <class F>
tb_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<tb_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TB_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return TB_ERR_UNKNOWN;
  }
}

tb_status null_arg(const char* what) {
  g_last_error = std::string(what) + " is null";
  return TB_ERR_NULL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Writes through `write` to a file, or to stdout for "-".
template <class W>
void emit(const char* path, W&& write) {
  if (!path) return;
  if (std::strcmp(path, "-") == 0) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError(std::string("cannot write ") + path);
  write(out);
  if (!out) throw IoError(std::string("write failed: ") + path);
}

// "file.json" holds one instance; "instances.json#test-0003" picks an entry.
Instance load_serve_instance(const std::string& spec) {
  const auto hash = spec.rfind('#');
  if (hash == std::string::npos) return Instance::load(spec);
  const std::string id = spec.substr(hash + 1);
  for (auto& e : load_instances(spec.substr(0, hash))) {
    if (e.id == id) return e.instance;
  }
  throw ParameterError("no instance '" + id + "' in " + spec.substr(0, hash));
}

}  // namespace

extern "C" {

const char* tb_version(void) { return "0.1.0"; }

const char* tb_last_error(void) { return g_last_error.c_str(); }

void tb_free_string(char* s) { std::free(s); }

tb_status tb_config_new(tb_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new tb_config{}; });
}

tb_status tb_config_load(const char* path, tb_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new tb_config{ExperimentConfig::load(path)}; });
}

tb_status tb_config_set(tb_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("config");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] {
    ExperimentConfig c = cfg->cfg;
    c.set(key, value);
    cfg->cfg = c;
  });
}

tb_status tb_config_to_json(const tb_config* cfg, char** out_json) {
  if (!cfg) return null_arg("config");
  if (!out_json) return null_arg("out_json");
  return guarded([&] { *out_json = dup_string(cfg->cfg.to_json().dump(2)); });
}

void tb_config_free(tb_config* cfg) { delete cfg; }

tb_status tb_gen_instances(const tb_config* cfg, const char* dir, size_t* out_count) {
  if (!cfg) return null_arg("config");
  if (!dir) return null_arg("dir");
  return guarded([&] {
    std::filesystem::create_directories(dir);
    const auto entries = generate_instances(cfg->cfg);
    save_instances((std::filesystem::path(dir) / "instances.json").string(), cfg->cfg, entries);
    if (out_count) *out_count = entries.size();
  });
}

tb_status tb_gen_corpus(const tb_config* cfg, const char* dir, size_t* out_records) {
  if (!cfg) return null_arg("config");
  if (!dir) return null_arg("dir");
  return guarded([&] {
    const CorpusManifest m = gen_corpus(cfg->cfg, dir);
    if (out_records) *out_records = m.records.size();
  });
}

tb_status tb_verify_corpus(const char* manifest_path) {
  if (!manifest_path) return null_arg("manifest_path");
  return guarded([&] { verify_corpus(manifest_path); });
}

tb_status tb_eval(const tb_config* cfg, const char* agent, const char* summary_csv, const char* runs_csv,
                  size_t* out_failed) {
  if (!cfg) return null_arg("config");
  if (!agent) return null_arg("agent");
  return guarded([&] {
    const EvalResult r = run_eval(cfg->cfg, AgentSpec::parse(agent));
    emit(summary_csv, [&](std::ostream& o) { write_metric_csv(o, r.metrics); });
    emit(runs_csv, [&](std::ostream& o) { write_runs_csv(o, r.runs); });
    if (out_failed) *out_failed = r.failed();
  });
}

tb_status tb_sweep(const tb_config* cfg, const char* agent, const char* axis, const double* values, size_t n_values,
                   const char* out_csv) {
  if (!cfg) return null_arg("config");
  if (!agent || !axis) return null_arg("agent/axis");
  if (!values && n_values > 0) return null_arg("values");
  return guarded([&] {
    const auto rows =
        sweep(cfg->cfg, AgentSpec::parse(agent), parse_axis(axis), std::vector<double>(values, values + n_values));
    emit(out_csv, [&](std::ostream& o) { write_sweep_csv(o, rows); });
  });
}

tb_status tb_kl_eval(const tb_config* cfg, const char* reference_policy, const char* candidate, const char* out_csv) {
  if (!cfg) return null_arg("config");
  if (!reference_policy || !candidate) return null_arg("reference/candidate");
  return guarded([&] {
    const auto curve = kl_eval(cfg->cfg, parse_policy(reference_policy), AgentSpec::parse(candidate));
    emit(out_csv, [&](std::ostream& o) { write_kl_csv(o, curve); });
  });
}

tb_status tb_model_build(const char* policy, int budget, int branching, tb_model** out) {
  if (!policy) return null_arg("policy");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new tb_model{build_model(budget, branching, parse_policy(policy))}; });
}

tb_status tb_model_load(const char* path, tb_model** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot read ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = new tb_model{HardAttnModel::from_text(ss.str())};
  });
}

tb_status tb_model_save(const tb_model* model, const char* path) {
  if (!model) return null_arg("model");
  return guarded([&] { emit(path, [&](std::ostream& o) { o << model->model.to_text(); }); });
}

tb_status tb_model_info(const tb_model* model, int* out_dimension, int* out_layers, int* out_slots) {
  if (!model) return null_arg("model");
  return guarded([&] {
    if (out_dimension) *out_dimension = model->model.dimension();
    if (out_layers) *out_layers = static_cast<int>(model->model.layers.size());
    if (out_slots) *out_slots = model->model.slots();
  });
}

void tb_model_free(tb_model* model) { delete model; }

tb_status tb_serve(const char* instance_path, int budget, int rollouts, const char* transport, int sessions,
                   uint64_t seed, double timeout_s, const char* log_path, const char* trace_path,
                   size_t* out_failed) {
  if (!instance_path || !transport) return null_arg("instance_path/transport");
  return guarded([&] {
    if (sessions < 1) throw ParameterError("sessions must be at least 1");
    if (rollouts < 1) throw ParameterError("rollouts must be at least 1");
    const Instance inst = load_serve_instance(instance_path);
    const std::string t = transport;
    std::unique_ptr<FdChannel> conn;
    std::unique_ptr<ChildProcess> proc;
    LineChannel* ch = nullptr;
    if (t == "stdio") {
      std::signal(SIGPIPE, SIG_IGN);
      conn = std::make_unique<FdChannel>(0, 1, false);
      ch = conn.get();
    } else if (t.rfind("cmd:", 0) == 0) {
      proc = std::make_unique<ChildProcess>(t.substr(4));
      ch = &proc->channel();
    } else if (t.rfind("listen:", 0) == 0) {
      const AgentSpec a = AgentSpec::parse(t);
      TcpListener listener(a.host, a.port);
      std::cerr << "listening on " << a.host << ":" << listener.port() << std::endl;
      conn = listener.accept(timeout_s);
      ch = conn.get();
    } else {
      throw ParameterError("unknown transport '" + t + "'");
    }
    std::string log, traces;
    std::size_t failed = 0;
    for (int k = 0; k < sessions; ++k) {
      const auto tree = inst.make_tree();
      const ServeResult r = serve_session(*tree, budget, ValueEstimator{rollouts},
                                          RngStream(seed, "serve").split(static_cast<std::uint64_t>(k)), *ch,
                                          timeout_s);
      log += "# session " + std::to_string(k) + " status " + r.status + (r.error.empty() ? "" : " (" + r.error + ")") +
             "\n";
      for (const auto& line : r.log) log += line + "\n";
      if (k > 0) traces += "\n";
      traces += render(r.trace);
      if (r.failed()) ++failed;
      if (r.status == "disconnected" || r.status == "timeout") break;
    }
    emit(log_path, [&](std::ostream& o) { o << log; });
    emit(trace_path, [&](std::ostream& o) { o << traces; });
    if (out_failed) *out_failed = failed;
  });
}

tb_status tb_agent(const char* agent, int branching, uint64_t seed, const char* transport, double timeout_s,
                   int* out_sessions) {
  if (!agent || !transport) return null_arg("agent/transport");
  return guarded([&] {
    const AgentSpec a = AgentSpec::parse(agent);
    std::unique_ptr<AgentBrain> brain;
    if (a.kind == AgentSpec::Kind::Policy) {
      brain = policy_brain(a.policy, seed);
    } else if (a.kind == AgentSpec::Kind::Model) {
      brain = model_brain(a.policy, branching, seed);
    } else {
      throw ParameterError("agent must be an internal policy or model:<policy>");
    }
    const std::string t = transport;
    std::unique_ptr<FdChannel> ch;
    if (t == "stdio") {
      std::signal(SIGPIPE, SIG_IGN);
      ch = std::make_unique<FdChannel>(0, 1, false);
    } else if (t.rfind("connect:", 0) == 0) {
      const std::string rest = t.substr(8);
      const auto colon = rest.rfind(':');
      if (colon == std::string::npos) throw ParameterError("connect transport needs host:port");
      ch = tcp_connect(rest.substr(0, colon), AgentSpec::parse("listen:" + rest).port);
    } else {
      throw ParameterError("unknown transport '" + t + "'");
    }
    const int n = run_agent(*ch, *brain, timeout_s);
    if (out_sessions) *out_sessions = n;
  });
}

}  // extern "C"
