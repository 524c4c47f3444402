#pragma once

#include <string>

#include "core/search_tree.hpp"
#include "core/trajectory.hpp"
#include "tracecodec/token.hpp"

namespace treebandit {

inline constexpr const char* kStartMarker = "start_of_iteration";
inline constexpr const char* kSelectMarker = "selected_child_and_then_reward";

/// Two-decimal value token, rounding halves up ("0.40", "1.00").
std::string format_value(double v);
/// Parses a value token; throws ParseError when it is not on the 0.01 grid.
double parse_value_token(const std::string& text);

/// One iteration per selection: marker, indexed frontier (first-revelation
/// order), selection marker with the chosen index, value of the chosen state.
/// The root's own value is not part of the format.
TraceRecord encode_empirical(const Trajectory& t, const SearchTree& tree);
std::string encode_empirical_text(const Trajectory& t, const SearchTree& tree);

/// Inverse of encode_empirical. The root step comes back with value 0 and the
/// step values come back rounded to two decimals.
Trajectory decode_empirical(const std::string& text, const SearchTree& tree);
Trajectory decode_empirical(const TraceRecord& rec, const SearchTree& tree);

}  // namespace treebandit
