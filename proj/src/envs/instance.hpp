#pragma once

#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

#include "envs/nav_env.hpp"
#include "envs/tree_env.hpp"

namespace treebandit {

/// A generated problem instance. The file form stores the spec and seed plus
/// the resulting goal table (and walls for mazes); loading regenerates from
/// the spec and insists on a bit-identical result.
class Instance {
 public:
  static Instance tree(const TreeSpec& spec);
  static Instance nav(const NavSpec& spec);
  /// Maze from an explicit layout (no generator involved).
  static Instance nav_layout(const NavLayout& layout);

  Family family() const { return family_; }
  /// Environment object for one search run. Tree instances share one
  /// immutable tree; mazes get a fresh lazily-interned tree per call so
  /// StateIds never depend on what other runs expanded.
  std::shared_ptr<const SearchTree> make_tree() const;

  const TreeInstance* tree_instance() const { return tree_.get(); }
  const NavInstance* nav_instance() const { return nav_.get(); }
  std::uint64_t seed() const;

  nlohmann::json to_json() const;
  static Instance from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Instance load(const std::string& path);

 private:
  Family family_ = Family::Tree;
  bool explicit_layout_ = false;
  std::shared_ptr<const TreeInstance> tree_;
  std::shared_ptr<const NavInstance> nav_;
};

}  // namespace treebandit
