#include "envs/value.hpp"

#include "core/errors.hpp"

namespace treebandit {

double estimate_value(const ValueEstimator& est, const SearchTree& tree, StateId s, RngStream& rng) {
  if (est.rollouts < 1) throw ParameterError("rollouts must be at least 1");
  if (tree.is_leaf(s)) return tree.reward(s);
  double sum = 0.0;
  for (int i = 0; i < est.rollouts; ++i) sum += tree.rollout(s, rng);
  return sum / est.rollouts;
}

}  // namespace treebandit
