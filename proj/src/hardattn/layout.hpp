#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace treebandit {

/// Named embedding coordinates. Scalars take one coordinate; a block "id"
/// of width n takes n consecutive coordinates named "id.0" .. "id.<n-1>".
class RegisterLayout {
 public:
  struct Block {
    int start = 0;
    int width = 0;
  };

  int add_scalar(const std::string& name);
  Block add_block(const std::string& name, int width);

  int size() const { return static_cast<int>(names_.size()); }
  bool has(const std::string& name) const { return scalars_.contains(name); }
  /// Coordinate of a scalar or of a block element "name.i"; throws ParameterError.
  int index(const std::string& name) const;
  bool has_block(const std::string& name) const { return blocks_.contains(name); }
  Block block(const std::string& name) const;
  int at(const std::string& block, int i) const;
  const std::string& name(int coord) const { return names_.at(static_cast<std::size_t>(coord)); }
  const std::vector<std::string>& block_order() const { return block_order_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> scalars_;
  std::unordered_map<std::string, Block> blocks_;
  std::vector<std::string> block_order_;
};

}  // namespace treebandit
