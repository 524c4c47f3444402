#include "search/run_search.hpp"

#include "core/errors.hpp"
#include "search/selection.hpp"

namespace treebandit {

StepRecord observe(const SearchTree& tree, StateId s, const ValueEstimator& est, RngStream& value_rng) {
  return StepRecord{s, estimate_value(est, tree, s, value_rng), tree.children(s)};
}

SearchRun run_search(const SearchTree& tree, const SearchConfig& cfg, const RngStream& rng) {
  if (cfg.budget < 1) throw ParameterError("budget must be at least 1");
  RngStream select_rng = rng.split("select");
  RngStream value_rng = rng.split("value");

  SearchRun run;
  StepRecord root = observe(tree, tree.root(), cfg.estimator, value_rng);
  SearchState st(root);
  run.trajectory.steps.push_back(std::move(root));
  run.paths.push_back({tree.root()});

  for (int t = 1; t <= cfg.budget; ++t) {
    if (st.frontier().empty()) {
      run.trajectory.exhausted = true;
      break;
    }
    Selection sel = select_next(cfg.policy, st, select_rng);
    if (sel.dead_end()) {
      run.dead_end = true;
      break;
    }
    StepRecord step = observe(tree, *sel.state, cfg.estimator, value_rng);
    st.record(step);
    run.trajectory.steps.push_back(std::move(step));
    run.paths.push_back(std::move(sel.path));
  }
  return run;
}

}  // namespace treebandit
