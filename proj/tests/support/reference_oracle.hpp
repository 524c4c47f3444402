#pragma once

// Straight-line re-derivation of the six search policies used as a test
// oracle. It shares no code with src/search: the frontier, subtree scans and
// statistics are recomputed from the raw visit list on every call.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "core/rational.hpp"
#include "core/search_tree.hpp"

namespace oracle {

using treebandit::Rational;
using treebandit::SearchTree;
using treebandit::StateId;

enum class Kind { UniformLeaf, GreedyLeaf, UniformPath, PureExploration, Greedy, UCT };

struct Visit {
  StateId state;
  double value;
};

struct Result {
  std::map<std::uint32_t, Rational> mass;  // keyed by state id
  Rational dead_end;
};

class Oracle {
 public:
  Oracle(const SearchTree& tree, std::vector<Visit> visits, bool modified, double c = 0.1)
      : tree_(tree), visits_(std::move(visits)), modified_(modified), c_(c) {
    for (const auto& v : visits_) visited_.insert(v.state.value);
  }

  std::vector<StateId> frontier() const {
    std::vector<StateId> out;
    for (const auto& v : visits_) {
      for (StateId ch : tree_.children(v.state)) {
        if (!visited_.contains(ch.value)) out.push_back(ch);
      }
    }
    return out;
  }

  Result distribution(Kind kind) const {
    Result r;
    const auto f = frontier();
    if (kind == Kind::UniformLeaf) {
      for (StateId s : f) r.mass[s.value] += Rational(1, static_cast<Rational::Int>(f.size()));
      return r;
    }
    if (kind == Kind::GreedyLeaf) {
      double best = -1;
      for (StateId s : f) best = std::max(best, value_at_visit(*tree_.parent(s)));
      std::vector<StateId> pool;
      for (StateId s : f) {
        if (value_at_visit(*tree_.parent(s)) == best) pool.push_back(s);
      }
      for (StateId s : pool) r.mass[s.value] += Rational(1, static_cast<Rational::Int>(pool.size()));
      return r;
    }
    descend(kind, tree_.root(), Rational(1), r);
    return r;
  }

  std::int64_t count(StateId x) const {
    std::int64_t n = 0;
    for (const auto& v : visits_) n += on_root_path(x, v.state) ? 1 : 0;
    return n;
  }

  Rational value(StateId x) const {
    Rational sum;
    for (const auto& v : visits_) {
      if (on_root_path(x, v.state)) sum += Rational::from_double(v.value);
    }
    return sum;
  }

 private:
  bool in_frontier(StateId s) const {
    if (visited_.contains(s.value)) return false;
    const auto p = tree_.parent(s);
    return p && visited_.contains(p->value);
  }

  bool subtree_has_frontier(StateId s) const {
    if (in_frontier(s)) return true;
    if (!visited_.contains(s.value)) return false;
    for (StateId ch : tree_.children(s)) {
      if (subtree_has_frontier(ch)) return true;
    }
    return false;
  }

  bool on_root_path(StateId x, StateId s) const {
    for (std::optional<StateId> cur = s; cur; cur = tree_.parent(*cur)) {
      if (*cur == x) return true;
    }
    return false;
  }

  double value_at_visit(StateId s) const {
    for (const auto& v : visits_) {
      if (v.state == s) return v.value;
    }
    return -1;
  }

  double score(Kind kind, StateId parent, StateId child) const {
    const double n = static_cast<double>(count(child));
    switch (kind) {
      case Kind::PureExploration: return -n;
      case Kind::Greedy: return value(child).to_double();
      default: {
        const double mean = (value(child) / Rational(count(child))).to_double();
        return mean + c_ * std::sqrt(std::log(2.0 * static_cast<double>(count(parent))) / n);
      }
    }
  }

  void descend(Kind kind, StateId node, const Rational& w, Result& r) const {
    if (in_frontier(node)) {
      r.mass[node.value] += w;
      return;
    }
    std::vector<StateId> kids;
    for (StateId ch : tree_.children(node)) {
      if (!modified_ || subtree_has_frontier(ch)) kids.push_back(ch);
    }
    std::vector<StateId> options;
    if (kind != Kind::UniformPath) {
      for (StateId ch : kids) {
        if (in_frontier(ch)) options.push_back(ch);
      }
    }
    if (options.empty() && !kids.empty()) {
      if (kind == Kind::UniformPath) {
        options = kids;
      } else if (kind == Kind::Greedy) {
        // exact comparison of rational sums
        Rational best = value(kids.front());
        for (StateId ch : kids) best = std::max(best, value(ch));
        for (StateId ch : kids) {
          if (value(ch) == best) options.push_back(ch);
        }
      } else {
        double best = -1e300;
        for (StateId ch : kids) best = std::max(best, score(kind, node, ch));
        for (StateId ch : kids) {
          if (score(kind, node, ch) == best) options.push_back(ch);
        }
      }
    }
    if (options.empty()) {
      r.dead_end += w;
      return;
    }
    const Rational share = w * Rational(1, static_cast<Rational::Int>(options.size()));
    for (StateId ch : options) descend(kind, ch, share, r);
  }

  const SearchTree& tree_;
  std::vector<Visit> visits_;
  std::set<std::uint32_t> visited_;
  bool modified_;
  double c_;
};

}  // namespace oracle
