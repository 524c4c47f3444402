#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "core/trajectory.hpp"
#include "tracecodec/token.hpp"

namespace treebandit {

/// State tokens of the theoretical formats are "S{k}", k being the order in
/// which the state first appears in the sequence (root = S0). Value tokens
/// are "V" followed by the shortest round-trip decimal of the value.
class SlotNamer {
 public:
  std::string name(StateId s);
  std::size_t slots() const { return slot_.size(); }

 private:
  std::unordered_map<StateId, std::size_t> slot_;
};

std::string value_token(double v);
/// Inverse of value_token; throws ParseError on malformed input.
double parse_theoretical_value(const std::string& token);

/// Per step t = 0..T: "?" S_t "%" V_t "#" children.
TraceRecord encode_leaf_theoretical(const Trajectory& t);

/// "[BOS]", then per step: "?" path joined by ">" "%" V_t "#" children.
/// paths[t] must end at steps[t].state; paths[0] is the root alone.
TraceRecord encode_tree_theoretical(const Trajectory& t, const std::vector<std::vector<StateId>>& paths);

}  // namespace treebandit
