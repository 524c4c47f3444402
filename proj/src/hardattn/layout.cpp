#include "hardattn/layout.hpp"

#include "core/errors.hpp"

namespace treebandit {

int RegisterLayout::add_scalar(const std::string& name) {
  if (scalars_.contains(name)) throw ParameterError("register '" + name + "' defined twice");
  const int coord = size();
  names_.push_back(name);
  scalars_.emplace(name, coord);
  return coord;
}

RegisterLayout::Block RegisterLayout::add_block(const std::string& name, int width) {
  if (blocks_.contains(name)) throw ParameterError("register block '" + name + "' defined twice");
  if (width < 1) throw ParameterError("register block '" + name + "' needs a positive width");
  const Block b{size(), width};
  for (int i = 0; i < width; ++i) add_scalar(name + "." + std::to_string(i));
  blocks_.emplace(name, b);
  block_order_.push_back(name);
  return b;
}

int RegisterLayout::index(const std::string& name) const {
  const auto it = scalars_.find(name);
  if (it == scalars_.end()) throw ParameterError("unknown register '" + name + "'");
  return it->second;
}

RegisterLayout::Block RegisterLayout::block(const std::string& name) const {
  const auto it = blocks_.find(name);
  if (it == blocks_.end()) throw ParameterError("unknown register block '" + name + "'");
  return it->second;
}

int RegisterLayout::at(const std::string& name, int i) const {
  const Block b = block(name);
  if (i < 0 || i >= b.width) throw ParameterError("register " + name + "." + std::to_string(i) + " out of range");
  return b.start + i;
}

}  // namespace treebandit
