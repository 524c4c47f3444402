#include "core/search_tree.hpp"

#include <algorithm>
#include <string>

#include "core/errors.hpp"

namespace treebandit {

std::string_view family_name(Family f) { return f == Family::Tree ? "tree" : "nav"; }

Family parse_family(std::string_view name) {
  if (name == "tree") return Family::Tree;
  if (name == "nav") return Family::Nav;
  throw ParameterError("unknown problem family '" + std::string(name) + "'");
}

double SearchTree::rollout(StateId s, RngStream& rng) const {
  for (;;) {
    const auto& kids = children(s);
    if (kids.empty()) return reward(s);
    s = kids[rng.uniform_index(kids.size())];
  }
}

double SearchTree::true_value(StateId s) const {
  const auto& kids = children(s);
  if (kids.empty()) return reward(s);
  double sum = 0.0;
  for (StateId c : kids) sum += true_value(c);
  return sum / static_cast<double>(kids.size());
}

std::size_t SearchTree::child_index(StateId s) const {
  const auto p = parent(s);
  if (!p) return 0;
  const auto& kids = children(*p);
  const auto it = std::find(kids.begin(), kids.end(), s);
  if (it == kids.end()) throw InvariantViolation("state missing from its parent's child list");
  return static_cast<std::size_t>(it - kids.begin());
}

std::vector<StateId> SearchTree::root_path(StateId s) const {
  std::vector<StateId> path{s};
  for (auto p = parent(s); p; p = parent(*p)) path.push_back(*p);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace treebandit
