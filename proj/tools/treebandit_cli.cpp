// treebandit command line: instance and corpus generation, evaluation,
// sweeps, KL curves, model construction and the agent wire protocol.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "treebandit/treebandit.h"

namespace {

struct ExperimentFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string seed, budget, policies, threads;
};

void add_experiment_flags(CLI::App* sub, ExperimentFlags& f) {
  sub->add_option("-c,--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("-s,--set", f.sets, "Override a config key, e.g. tree.depth=4 (repeatable)");
  sub->add_option("--seed", f.seed, "Shortcut for --set seed=N");
  sub->add_option("--budget", f.budget, "Shortcut for --set budget=T");
  sub->add_option("--policies", f.policies, "Shortcut for --set policies=a,b");
  sub->add_option("--threads", f.threads, "Worker threads (0: all cores)");
}

int fail(const char* what) {
  std::cerr << "treebandit: " << what << ": " << tb_last_error() << '\n';
  return 1;
}

// Owns a tb_config built from the flags; null on error (already reported).
struct Config {
  tb_config* ptr = nullptr;
  ~Config() { tb_config_free(ptr); }
};

bool build_config(const ExperimentFlags& f, Config& out) {
  const tb_status st = f.config.empty() ? tb_config_new(&out.ptr) : tb_config_load(f.config.c_str(), &out.ptr);
  if (st != TB_OK) {
    fail("config");
    return false;
  }
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "treebandit: --set expects key=value, got '" << s << "'\n";
      return false;
    }
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!f.seed.empty()) kv.emplace_back("seed", f.seed);
  if (!f.budget.empty()) kv.emplace_back("budget", f.budget);
  if (!f.policies.empty()) kv.emplace_back("policies", f.policies);
  if (!f.threads.empty()) kv.emplace_back("threads", f.threads);
  for (const auto& [k, v] : kv) {
    if (tb_config_set(out.ptr, k.c_str(), v.c_str()) != TB_OK) {
      fail(("--set " + k).c_str());
      return false;
    }
  }
  return true;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree search with bandit feedback: reference policies, traces, hard-attention models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tb_version());

  ExperimentFlags gi_flags, gc_flags, ev_flags, sw_flags, kl_flags;

  std::string gi_out = "instances";
  auto* gi = app.add_subcommand("gen-instances", "Generate train, val and test instances");
  add_experiment_flags(gi, gi_flags);
  gi->add_option("-o,--out", gi_out, "Output directory");

  std::string gc_out = "corpus";
  auto* gc = app.add_subcommand("gen-corpus", "Generate the empirical-format trace corpus and manifest");
  add_experiment_flags(gc, gc_flags);
  gc->add_option("-o,--out", gc_out, "Output directory");

  std::string ev_agent = "uniform-leaf", ev_out = "-", ev_runs;
  auto* ev = app.add_subcommand("eval", "Evaluate an agent on the test instances");
  add_experiment_flags(ev, ev_flags);
  ev->add_option("-a,--agent", ev_agent, "policy, model:<policy>, model-file:<path>, cmd:<command> or listen:[host:]port");
  ev->add_option("-o,--out", ev_out, "Metric summary CSV ('-' for stdout)");
  ev->add_option("--runs", ev_runs, "Per-run CSV");

  std::string sw_agent = "uniform-leaf", sw_axis, sw_values, sw_out = "-";
  auto* sw = app.add_subcommand("sweep", "Evaluate an agent over one varied setting");
  add_experiment_flags(sw, sw_flags);
  sw->add_option("-a,--agent", sw_agent, "Agent, as for eval");
  sw->add_option("--axis", sw_axis, "budget, depth, goals or wall_density")->required();
  sw->add_option("--values", sw_values, "Comma-separated values")->required();
  sw->add_option("-o,--out", sw_out, "CSV ('-' for stdout)");

  std::string kl_ref, kl_cand, kl_out = "-";
  auto* kl = app.add_subcommand("kl-eval", "Per-step KL divergence from a reference policy");
  add_experiment_flags(kl, kl_flags);
  kl->add_option("--reference", kl_ref, "Reference policy")->required();
  kl->add_option("--candidate", kl_cand, "Policy, model:<policy> or model-file:<path>")->required();
  kl->add_option("-o,--out", kl_out, "CSV ('-' for stdout)");

  std::string bm_policy, bm_out = "-";
  int bm_budget = 50, bm_branching = 2;
  auto* bm = app.add_subcommand("build-model", "Construct and serialize a hard-attention model");
  bm->add_option("-p,--policy", bm_policy, "Policy to realize")->required();
  bm->add_option("--budget", bm_budget, "Search budget T");
  bm->add_option("--branching", bm_branching, "Branching factor B");
  bm->add_option("-o,--out", bm_out, "Model file ('-' for stdout)");

  std::string sv_instance, sv_transport = "stdio", sv_log, sv_trace;
  int sv_budget = 50, sv_rollouts = 1, sv_sessions = 1;
  std::uint64_t sv_seed = 0;
  double sv_timeout = 30.0;
  auto* sv = app.add_subcommand("serve", "Run the environment side of the agent protocol");
  sv->add_option("-i,--instance", sv_instance, "Instance file, or instances.json#<id>")->required();
  sv->add_option("--budget", sv_budget, "Selections per session");
  sv->add_option("--rollouts", sv_rollouts, "Rollouts per value estimate");
  sv->add_option("-t,--transport", sv_transport, "stdio, cmd:<command> or listen:[host:]port");
  sv->add_option("--sessions", sv_sessions, "Sessions to run back to back");
  sv->add_option("--seed", sv_seed, "Seed of the value noise");
  sv->add_option("--timeout", sv_timeout, "Seconds to wait for each agent message");
  sv->add_option("--log", sv_log, "Session log file");
  sv->add_option("--trace", sv_trace, "Empirical traces of the sessions");

  std::string ag_agent = "uniform-leaf", ag_transport = "stdio";
  int ag_branching = 2;
  std::uint64_t ag_seed = 0;
  double ag_timeout = 0.0;
  auto* ag = app.add_subcommand("agent", "Answer protocol sessions with a policy or a constructed model");
  ag->add_option("-a,--agent", ag_agent, "policy or model:<policy>");
  ag->add_option("--branching", ag_branching, "Branching factor the model is built for");
  ag->add_option("--seed", ag_seed, "Seed of the selection draws");
  ag->add_option("-t,--transport", ag_transport, "stdio or connect:host:port");
  ag->add_option("--timeout", ag_timeout, "Seconds to wait for the environment (0: forever)");

  CLI11_PARSE(app, argc, argv);

  Config cfg;
  if (gi->parsed()) {
    if (!build_config(gi_flags, cfg)) return 1;
    std::size_t n = 0;
    if (tb_gen_instances(cfg.ptr, gi_out.c_str(), &n) != TB_OK) return fail("gen-instances");
    std::cerr << n << " instances written to " << gi_out << "/instances.json\n";
  } else if (gc->parsed()) {
    if (!build_config(gc_flags, cfg)) return 1;
    std::size_t n = 0;
    if (tb_gen_corpus(cfg.ptr, gc_out.c_str(), &n) != TB_OK) return fail("gen-corpus");
    const std::string manifest = gc_out + "/manifest.json";
    if (tb_verify_corpus(manifest.c_str()) != TB_OK) return fail("verify");
    std::cerr << n << " records written; manifest " << manifest << '\n';
  } else if (ev->parsed()) {
    if (!build_config(ev_flags, cfg)) return 1;
    std::size_t failed = 0;
    if (tb_eval(cfg.ptr, ev_agent.c_str(), ev_out.c_str(), ev_runs.empty() ? nullptr : ev_runs.c_str(), &failed) !=
        TB_OK) {
      return fail("eval");
    }
    if (failed > 0) std::cerr << failed << " runs failed and were scored as misses\n";
  } else if (sw->parsed()) {
    if (!build_config(sw_flags, cfg)) return 1;
    std::vector<double> values;
    try {
      values = parse_values(sw_values);
    } catch (const std::exception&) {
      std::cerr << "treebandit: bad --values '" << sw_values << "'\n";
      return 1;
    }
    if (tb_sweep(cfg.ptr, sw_agent.c_str(), sw_axis.c_str(), values.data(), values.size(), sw_out.c_str()) != TB_OK) {
      return fail("sweep");
    }
  } else if (kl->parsed()) {
    if (!build_config(kl_flags, cfg)) return 1;
    if (tb_kl_eval(cfg.ptr, kl_ref.c_str(), kl_cand.c_str(), kl_out.c_str()) != TB_OK) return fail("kl-eval");
  } else if (bm->parsed()) {
    tb_model* m = nullptr;
    if (tb_model_build(bm_policy.c_str(), bm_budget, bm_branching, &m) != TB_OK) return fail("build-model");
    int d = 0, layers = 0, slots = 0;
    tb_model_info(m, &d, &layers, &slots);
    const tb_status st = tb_model_save(m, bm_out.c_str());
    tb_model_free(m);
    if (st != TB_OK) return fail("build-model");
    std::cerr << "d=" << d << " layers=" << layers << " state slots=" << slots << '\n';
  } else if (sv->parsed()) {
    if (sv_transport == "stdio" && (sv_log == "-" || sv_trace == "-")) {
      std::cerr << "treebandit: stdout carries the protocol; write --log/--trace to files\n";
      return 1;
    }
    std::size_t failed = 0;
    if (tb_serve(sv_instance.c_str(), sv_budget, sv_rollouts, sv_transport.c_str(), sv_sessions, sv_seed, sv_timeout,
                 sv_log.empty() ? nullptr : sv_log.c_str(), sv_trace.empty() ? nullptr : sv_trace.c_str(),
                 &failed) != TB_OK) {
      return fail("serve");
    }
    if (failed > 0) {
      std::cerr << failed << " of " << sv_sessions << " sessions failed\n";
      return 2;
    }
  } else if (ag->parsed()) {
    int sessions = 0;
    if (tb_agent(ag_agent.c_str(), ag_branching, ag_seed, ag_transport.c_str(), ag_timeout, &sessions) != TB_OK) {
      return fail("agent");
    }
    std::cerr << sessions << " sessions answered\n";
  }
  return 0;
}
