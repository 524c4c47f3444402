#include "search/tree_stats.hpp"

#include <algorithm>
#include <string>

#include "core/errors.hpp"

namespace treebandit {

namespace {
const Rational kZero;
}

std::int64_t TreeStats::count(StateId s) const {
  const auto it = entries_.find(s);
  return it == entries_.end() ? 0 : it->second.count;
}

const Rational& TreeStats::value(StateId s) const {
  const auto it = entries_.find(s);
  return it == entries_.end() ? kZero : it->second.value;
}

void TreeStats::backpropagate(const std::vector<StateId>& path, const Rational& value) {
  for (StateId s : path) {
    auto& e = entries_[s];
    e.count += 1;
    e.value += value;
  }
}

SearchState::SearchState(const StepRecord& root_step) : frontier_(root_step) {
  steps_.push_back(root_step);
  values_[root_step.state] = root_step.value;
  stats_.backpropagate({root_step.state}, Rational::from_double(root_step.value));
}

SearchState SearchState::from_prefix(const std::vector<StepRecord>& prefix) {
  if (prefix.empty()) throw StructuralError("trajectory prefix is empty");
  SearchState st(prefix.front());
  for (std::size_t i = 1; i < prefix.size(); ++i) st.record(prefix[i]);
  return st;
}

void SearchState::record(const StepRecord& step) {
  frontier_.visit(step);
  steps_.push_back(step);
  values_[step.state] = step.value;
  stats_.backpropagate(path_to(step.state), Rational::from_double(step.value));
}

double SearchState::value_of(StateId s) const {
  const auto it = values_.find(s);
  if (it == values_.end()) throw StructuralError("state " + std::to_string(s.value) + " has no recorded value");
  return it->second;
}

std::vector<StateId> SearchState::path_to(StateId s) const {
  std::vector<StateId> path{s};
  for (auto p = frontier_.parent_of(s); p; p = frontier_.parent_of(*p)) path.push_back(*p);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace treebandit
