#include "hardattn/agent.hpp"

#include "core/errors.hpp"
#include "tracecodec/theoretical.hpp"

namespace treebandit {

namespace {

// Decoding contexts of the tree grammar.
const std::string kAfterQuery = "?";
const std::string kAfterState = "state";
const std::string kAfterArrow = ">";

}  // namespace

ModelPolicy::ModelPolicy(const HardAttnModel& model, const StepRecord& root_step, bool check_hygiene)
    : model_(&model), session_(model, check_hygiene), state_(root_step) {
  if (model.family == ModelFamily::Tree) session_.push("[BOS]");
  push_step(root_step, {root_step.state});
}

const std::string& ModelPolicy::name(StateId s) {
  auto it = names_.find(s);
  if (it == names_.end()) {
    const std::string n = "S" + std::to_string(names_.size());
    it = names_.emplace(s, n).first;
    states_.emplace(n, s);
  }
  return it->second;
}

bool ModelPolicy::lookup(const std::string& token, StateId& s) const {
  const auto it = states_.find(token);
  if (it == states_.end()) return false;
  s = it->second;
  return true;
}

void ModelPolicy::push_step(const StepRecord& step, const std::vector<StateId>& path) {
  session_.push("?");
  if (model_->family == ModelFamily::Leaf) {
    session_.push(name(step.state));
  } else {
    if (path.empty() || path.back() != step.state) throw StructuralError("path does not end at the selected state");
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0) session_.push(">");
      session_.push(name(path[i]));
    }
  }
  session_.push("%");
  session_.push(value_token(step.value));
  session_.push("#");
  for (StateId c : step.children) session_.push(name(c));
}

void ModelPolicy::record(const StepRecord& step, const std::vector<StateId>& path) {
  if (model_->family == ModelFamily::Tree && (path.empty() || path.back() != step.state)) {
    throw StructuralError("path does not end at the selected state");
  }
  state_.record(step);
  pending_.emplace_back(step, path);
}

void ModelPolicy::flush() {
  for (const auto& [step, path] : pending_) push_step(step, path);
  pending_.clear();
}

Session& ModelPolicy::session() {
  flush();
  return session_;
}

bool ModelPolicy::legal(const std::string& ctx, StateId last, const std::string& tok, StateId& next) const {
  const Frontier& f = state_.frontier();
  if (ctx == kAfterQuery) return lookup(tok, next) && next == f.root();
  if (ctx == kAfterState) {
    if (tok == ">") return f.visited(last);
    if (tok == "%") return f.contains(last);
    return false;
  }
  if (!lookup(tok, next)) return false;
  const auto p = f.parent_of(next);
  return p && *p == last;
}

void ModelPolicy::enumerate(const std::string& ctx, StateId last, const Rational& weight,
                            std::unordered_map<StateId, Rational>& mass, Rational& invalid) {
  const NextTokenDistribution d = session_.next();
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    const std::string& tok = d.support[i];
    const Rational w = weight * d.probabilities[i];
    StateId next = last;
    if (!legal(ctx, last, tok, next)) {
      invalid += w;
      continue;
    }
    if (ctx == kAfterState && tok == "%") {
      mass[last] += w;
      continue;
    }
    session_.push(tok);
    if (ctx == kAfterState) {
      enumerate(kAfterArrow, last, w, mass, invalid);
    } else {
      enumerate(kAfterState, next, w, mass, invalid);
    }
    session_.pop();
  }
}

NextStateDistribution ModelPolicy::distribution() {
  const Frontier& f = state_.frontier();
  if (f.empty()) throw StructuralError("frontier is empty");
  std::unordered_map<StateId, Rational> mass;
  Rational invalid;
  flush();
  session_.push("?");
  if (model_->family == ModelFamily::Leaf) {
    const NextTokenDistribution d = session_.next();
    for (std::size_t i = 0; i < d.support.size(); ++i) {
      StateId s;
      if (lookup(d.support[i], s) && f.contains(s)) {
        mass[s] += d.probabilities[i];
      } else {
        invalid += d.probabilities[i];
      }
    }
  } else {
    enumerate(kAfterQuery, f.root(), Rational(1), mass, invalid);
  }
  session_.pop();

  NextStateDistribution out;
  out.support = f.members();
  for (StateId m : out.support) {
    const auto it = mass.find(m);
    out.exact.push_back(it == mass.end() ? Rational() : it->second);
    out.probabilities.push_back(out.exact.back().to_double());
  }
  out.exact_dead_end_mass = invalid;
  out.dead_end_mass = invalid.to_double();
  return out;
}

Selection ModelPolicy::sample(RngStream& rng) {
  const Frontier& f = state_.frontier();
  if (f.empty()) throw StructuralError("frontier is empty");
  flush();
  session_.push("?");
  std::size_t pushed = 1;
  auto unwind = [&] {
    for (; pushed > 0; --pushed) session_.pop();
  };
  Selection sel;
  try {
    if (model_->family == ModelFamily::Leaf) {
      const NextTokenDistribution d = session_.next();
      const std::string& tok = d.support[rng.uniform_index(d.support.size())];
      StateId s;
      if (!lookup(tok, s) || !f.contains(s)) throw ProtocolError("model selected '" + tok + "', not a frontier state");
      sel = Selection{s, state_.path_to(s)};
    } else {
      std::string ctx = kAfterQuery;
      StateId last = f.root();
      while (true) {
        if (ctx == kAfterArrow && f.revealed_children(last).empty()) break;  // visited leaf: dead end
        const NextTokenDistribution d = session_.next();
        const std::string& tok = d.support[rng.uniform_index(d.support.size())];
        StateId next = last;
        if (!legal(ctx, last, tok, next)) throw ProtocolError("model emitted illegal token '" + tok + "'");
        if (ctx == kAfterState && tok == "%") {
          sel.state = last;
          break;
        }
        session_.push(tok);
        ++pushed;
        if (ctx == kAfterState) {
          ctx = kAfterArrow;
        } else {
          sel.path.push_back(next);
          last = next;
          ctx = kAfterState;
        }
      }
    }
  } catch (...) {
    unwind();
    throw;
  }
  unwind();
  return sel;
}

SearchRun rollout_with_model(const HardAttnModel& model, const SearchTree& tree, const ValueEstimator& estimator,
                             int budget, const RngStream& rng) {
  if (budget < 1) throw ParameterError("budget must be at least 1");
  RngStream select_rng = rng.split("select");
  RngStream value_rng = rng.split("value");
  SearchRun run;
  StepRecord root = observe(tree, tree.root(), estimator, value_rng);
  ModelPolicy agent(model, root);
  run.trajectory.steps.push_back(std::move(root));
  run.paths.push_back({tree.root()});
  for (int t = 1; t <= budget; ++t) {
    if (agent.state().frontier().empty()) {
      run.trajectory.exhausted = true;
      break;
    }
    Selection sel = agent.sample(select_rng);
    if (sel.dead_end()) {
      run.dead_end = true;
      break;
    }
    StepRecord step = observe(tree, *sel.state, estimator, value_rng);
    agent.record(step, sel.path);
    run.trajectory.steps.push_back(std::move(step));
    run.paths.push_back(std::move(sel.path));
  }
  return run;
}

}  // namespace treebandit
