#pragma once

#include <string>
#include <vector>

#include "core/search_tree.hpp"

namespace treebandit {

inline constexpr const char* kRootName = "r0d0";

/// "r0d0>i{index}d{depth}..." for trees, "x{col}y{row}>..." for mazes.
std::string state_name(const SearchTree& tree, StateId s);

/// Resolves a name produced by state_name. Throws ParseError when the name
/// does not denote a state of this tree.
StateId resolve_state_name(const SearchTree& tree, const std::string& name);

/// Splits a maze path name into vertex tokens with ">" between them.
std::vector<std::string> split_path_name(const std::string& name);

}  // namespace treebandit
