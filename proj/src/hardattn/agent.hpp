#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "core/rng.hpp"
#include "envs/value.hpp"
#include "hardattn/session.hpp"
#include "search/run_search.hpp"
#include "search/selection.hpp"

namespace treebandit {

/// Runs a constructed model as a search policy. It keeps the theoretical
/// trace of the trajectory so far (the same tokens encode_leaf_theoretical
/// and encode_tree_theoretical produce) and reads selections off the model.
class ModelPolicy {
 public:
  ModelPolicy(const HardAttnModel& model, const StepRecord& root_step, bool check_hygiene = false);

  /// Appends one selection. `path` is the root path the selection took
  /// (only tree models encode it). Tokens reach the model lazily, so a model
  /// built for budget T never has to hold the children of the T-th selection.
  void record(const StepRecord& step, const std::vector<StateId>& path);

  /// Exact distribution of the next selection. Tree models are unrolled over
  /// every branch of their generated path; continuations that are not legal
  /// moves are reported as dead_end_mass.
  NextStateDistribution distribution();

  /// Samples one selection. Returns a dead-end Selection when an N(s) walk
  /// reaches a visited leaf; throws ProtocolError if the model names a state
  /// that is not a legal move.
  Selection sample(RngStream& rng);

  const SearchState& state() const { return state_; }
  /// The model's input so far (pending steps are flushed first).
  Session& session();

 private:
  const std::string& name(StateId s);
  bool lookup(const std::string& token, StateId& s) const;
  void push_step(const StepRecord& step, const std::vector<StateId>& path);
  void flush();
  void enumerate(const std::string& ctx, StateId last, const Rational& weight,
                 std::unordered_map<StateId, Rational>& mass, Rational& invalid);
  bool legal(const std::string& ctx, StateId last, const std::string& tok, StateId& next) const;

  const HardAttnModel* model_;
  Session session_;
  SearchState state_;
  std::unordered_map<StateId, std::string> names_;
  std::unordered_map<std::string, StateId> states_;
  std::vector<std::pair<StepRecord, std::vector<StateId>>> pending_;
};

/// Closed-loop search driven by the model: selections come from the model
/// (rng.split("select")), values from the estimator (rng.split("value")).
SearchRun rollout_with_model(const HardAttnModel& model, const SearchTree& tree, const ValueEstimator& estimator,
                             int budget, const RngStream& rng);

}  // namespace treebandit
