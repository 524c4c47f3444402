#include "search/selection.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "core/errors.hpp"

namespace treebandit {

double uct_score(const Rational& value, std::int64_t count, std::int64_t parent_count, double c) {
  if (count <= 0) return std::numeric_limits<double>::infinity();
  const double mean = (value / Rational(static_cast<long long>(count))).to_double();
  const double n = static_cast<double>(count);
  return mean + c * std::sqrt(std::log(2.0 * static_cast<double>(parent_count)) / n);
}

double traversal_score(const Policy& policy, const TreeStats& stats, StateId parent, StateId child) {
  switch (policy.kind) {
    case PolicyKind::PathPureExploration: return -static_cast<double>(stats.count(child));
    case PolicyKind::PathGreedy: return stats.value(child).to_double();
    case PolicyKind::PathUCT: return uct_score(stats.value(child), stats.count(child), stats.count(parent), policy.c);
    case PolicyKind::UniformPath: return 0.0;
    default: throw ParameterError("leaf policies have no traversal score");
  }
}

namespace {

/// Indices of the maximal elements under `better(a, b)` (a strictly better than b).
template <class Better>
std::vector<std::size_t> argmax_set(std::size_t n, Better better) {
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < n; ++i) {
    if (best.empty() || better(i, best.front())) {
      best.assign(1, i);
    } else if (!better(best.front(), i)) {
      best.push_back(i);
    }
  }
  return best;
}

std::vector<StateId> best_children(const Policy& policy, const TreeStats& stats, StateId parent,
                                   const std::vector<StateId>& kids) {
  std::vector<std::size_t> idx;
  switch (policy.kind) {
    case PolicyKind::PathGreedy:
      idx = argmax_set(kids.size(), [&](std::size_t a, std::size_t b) {
        return stats.value(kids[a]) > stats.value(kids[b]);
      });
      break;
    case PolicyKind::PathPureExploration:
      idx = argmax_set(kids.size(), [&](std::size_t a, std::size_t b) {
        return stats.count(kids[a]) < stats.count(kids[b]);
      });
      break;
    case PolicyKind::PathUCT: {
      std::vector<double> score(kids.size());
      for (std::size_t i = 0; i < kids.size(); ++i) score[i] = traversal_score(policy, stats, parent, kids[i]);
      idx = argmax_set(kids.size(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
      break;
    }
    default:
      idx.resize(kids.size());
      for (std::size_t i = 0; i < kids.size(); ++i) idx[i] = i;
  }
  std::vector<StateId> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(kids[i]);
  return out;
}

/// Frontier members eligible under greedy leaf sampling, grouped by parent in
/// order of first appearance.
std::vector<std::pair<StateId, std::vector<StateId>>> greedy_groups(const SearchState& st) {
  const Frontier& f = st.frontier();
  std::vector<std::pair<StateId, std::vector<StateId>>> groups;
  std::unordered_map<StateId, std::size_t> slot;
  double best = -1.0;
  for (StateId m : f.members()) {
    const StateId p = *f.parent_of(m);
    const double v = st.value_of(p);
    if (v < best) continue;
    if (v > best) {
      best = v;
      groups.clear();
      slot.clear();
    }
    auto [it, fresh] = slot.emplace(p, groups.size());
    if (fresh) groups.push_back({p, {}});
    groups[it->second].second.push_back(m);
  }
  return groups;
}

void require_nonempty(const Frontier& f) {
  if (f.empty()) throw StructuralError("frontier is empty");
}

}  // namespace

StateId step_uniform_leaf(const Frontier& frontier, RngStream& rng) {
  require_nonempty(frontier);
  return frontier.members()[rng.uniform_index(frontier.size())];
}

StateId step_greedy_leaf(const SearchState& st, GreedyLeafTies ties, RngStream& rng) {
  require_nonempty(st.frontier());
  const auto groups = greedy_groups(st);
  if (ties == GreedyLeafTies::ParentFirst) {
    const auto& g = groups[rng.uniform_index(groups.size())].second;
    return g[rng.uniform_index(g.size())];
  }
  std::vector<StateId> pool;
  for (const auto& g : groups) pool.insert(pool.end(), g.second.begin(), g.second.end());
  return pool[rng.uniform_index(pool.size())];
}

WalkChoice walk_choice(const Policy& policy, const SearchState& st, StateId node) {
  const Frontier& f = st.frontier();
  if (f.contains(node)) return {WalkChoice::Kind::Stop, {}};
  std::vector<StateId> kids = policy.successors == SuccessorRule::Modified
                                  ? modified_successors(node, f, policy.exclusion)
                                  : f.revealed_children(node);
  if (policy.kind != PolicyKind::UniformPath) {
    std::vector<StateId> unvisited;
    for (StateId c : kids) {
      if (f.contains(c)) unvisited.push_back(c);
    }
    if (!unvisited.empty()) return {WalkChoice::Kind::Branch, std::move(unvisited)};
  }
  if (kids.empty()) return {WalkChoice::Kind::DeadEnd, {}};
  if (policy.kind == PolicyKind::UniformPath) return {WalkChoice::Kind::Branch, std::move(kids)};
  return {WalkChoice::Kind::Branch, best_children(policy, st.stats(), node, kids)};
}

namespace {

Selection walk(const SearchState& st, const Policy& policy, RngStream& rng) {
  require_nonempty(st.frontier());
  Selection sel;
  StateId node = st.root();
  for (std::size_t guard = 0;; ++guard) {
    sel.path.push_back(node);
    const WalkChoice ch = walk_choice(policy, st, node);
    if (ch.kind == WalkChoice::Kind::Stop) {
      sel.state = node;
      return sel;
    }
    if (ch.kind == WalkChoice::Kind::DeadEnd) return sel;
    node = ch.options[rng.uniform_index(ch.options.size())];
    if (guard > st.steps().size() + 1) throw InvariantViolation("path walk failed to terminate");
  }
}

}  // namespace

Selection step_uniform_path(const SearchState& st, const Policy& policy, RngStream& rng) {
  Policy p = policy;
  p.kind = PolicyKind::UniformPath;
  return walk(st, p, rng);
}

Selection step_policy_path(const SearchState& st, const Policy& policy, RngStream& rng) {
  if (!policy.is_path() || policy.kind == PolicyKind::UniformPath) {
    throw ParameterError("step_policy_path needs a guided path policy");
  }
  return walk(st, policy, rng);
}

Selection select_next(const Policy& policy, const SearchState& st, RngStream& rng) {
  switch (policy.kind) {
    case PolicyKind::UniformLeaf: {
      const StateId s = step_uniform_leaf(st.frontier(), rng);
      return Selection{s, st.path_to(s)};
    }
    case PolicyKind::GreedyLeaf: {
      const StateId s = step_greedy_leaf(st, policy.leaf_ties, rng);
      return Selection{s, st.path_to(s)};
    }
    case PolicyKind::UniformPath: return step_uniform_path(st, policy, rng);
    default: return step_policy_path(st, policy, rng);
  }
}

double NextStateDistribution::probability_of(StateId s) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == s) return probabilities[i];
  }
  return 0.0;
}

namespace {

template <class Num>
struct Accumulator {
  std::unordered_map<StateId, Num> mass;
  Num dead_end{};
};

template <class Num>
Num one_over(std::size_t n) {
  if constexpr (std::is_same_v<Num, Rational>) {
    return Rational(1, static_cast<Rational::Int>(n));
  } else {
    return Num(1) / static_cast<Num>(n);
  }
}

template <class Num>
void accumulate_walk(const Policy& policy, const SearchState& st, StateId node, const Num& weight,
                     Accumulator<Num>& acc) {
  const WalkChoice ch = walk_choice(policy, st, node);
  if (ch.kind == WalkChoice::Kind::Stop) {
    acc.mass[node] += weight;
    return;
  }
  if (ch.kind == WalkChoice::Kind::DeadEnd) {
    acc.dead_end += weight;
    return;
  }
  const Num share = weight * one_over<Num>(ch.options.size());
  for (StateId c : ch.options) accumulate_walk(policy, st, c, share, acc);
}

template <class Num>
Accumulator<Num> analytic(const Policy& policy, const SearchState& st) {
  Accumulator<Num> acc;
  const Frontier& f = st.frontier();
  switch (policy.kind) {
    case PolicyKind::UniformLeaf: {
      const Num p = one_over<Num>(f.size());
      for (StateId m : f.members()) acc.mass[m] += p;
      break;
    }
    case PolicyKind::GreedyLeaf: {
      const auto groups = greedy_groups(st);
      if (policy.leaf_ties == GreedyLeafTies::ParentFirst) {
        const Num pg = one_over<Num>(groups.size());
        for (const auto& g : groups) {
          const Num pc = pg * one_over<Num>(g.second.size());
          for (StateId m : g.second) acc.mass[m] += pc;
        }
      } else {
        std::size_t total = 0;
        for (const auto& g : groups) total += g.second.size();
        const Num p = one_over<Num>(total);
        for (const auto& g : groups) {
          for (StateId m : g.second) acc.mass[m] += p;
        }
      }
      break;
    }
    default: accumulate_walk<Num>(policy, st, st.root(), Num(1), acc);
  }
  return acc;
}

}  // namespace

NextStateDistribution next_state_distribution(const Policy& policy, const SearchState& st, DistributionMode mode,
                                              int samples, const RngStream* rng) {
  const Frontier& f = st.frontier();
  require_nonempty(f);
  NextStateDistribution d;
  d.support = f.members();
  if (mode == DistributionMode::Empirical) {
    if (samples < 1) throw ParameterError("empirical mode needs at least one sample");
    const RngStream base = rng ? *rng : RngStream(0, "empirical-next-state");
    std::unordered_map<StateId, int> hits;
    int dead = 0;
    for (int i = 0; i < samples; ++i) {
      RngStream r = base.split(static_cast<std::uint64_t>(i));
      const Selection sel = select_next(policy, st, r);
      if (sel.state) {
        ++hits[*sel.state];
      } else {
        ++dead;
      }
    }
    for (StateId m : d.support) d.probabilities.push_back(static_cast<double>(hits[m]) / samples);
    d.dead_end_mass = static_cast<double>(dead) / samples;
    return d;
  }
  try {
    const auto acc = analytic<Rational>(policy, st);
    for (StateId m : d.support) {
      const auto it = acc.mass.find(m);
      d.exact.push_back(it == acc.mass.end() ? Rational() : it->second);
      d.probabilities.push_back(d.exact.back().to_double());
    }
    d.exact_dead_end_mass = acc.dead_end;
    d.dead_end_mass = acc.dead_end.to_double();
  } catch (const std::overflow_error&) {
    // Denominators outgrew 128 bits (very deep walks); fall back to long double.
    d.exact.clear();
    d.probabilities.clear();
    const auto acc = analytic<long double>(policy, st);
    for (StateId m : d.support) {
      const auto it = acc.mass.find(m);
      d.probabilities.push_back(it == acc.mass.end() ? 0.0 : static_cast<double>(it->second));
    }
    d.exact_dead_end_mass = Rational();
    d.dead_end_mass = static_cast<double>(acc.dead_end);
  }
  return d;
}

NextStateDistribution next_state_distribution(const Policy& policy, const std::vector<StepRecord>& prefix,
                                              DistributionMode mode, int samples, const RngStream* rng) {
  return next_state_distribution(policy, SearchState::from_prefix(prefix), mode, samples, rng);
}

}  // namespace treebandit
