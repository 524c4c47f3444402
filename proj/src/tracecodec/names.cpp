#include "tracecodec/names.hpp"

#include <charconv>

#include "core/errors.hpp"
#include "envs/nav_env.hpp"

namespace treebandit {

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

/// Parses "<a><n1><b><n2>" (e.g. "i2d1", "x0y3") into its two integers.
bool parse_pair(const std::string& seg, char a, char b, int& n1, int& n2) {
  if (seg.size() < 4 || seg[0] != a) return false;
  const auto mid = seg.find(b, 1);
  if (mid == std::string::npos || mid == 1 || mid + 1 >= seg.size()) return false;
  const char* p = seg.data();
  auto r1 = std::from_chars(p + 1, p + mid, n1);
  if (r1.ec != std::errc() || r1.ptr != p + mid) return false;
  auto r2 = std::from_chars(p + mid + 1, p + seg.size(), n2);
  return r2.ec == std::errc() && r2.ptr == p + seg.size();
}

const NavTree& as_nav(const SearchTree& tree) {
  const auto* nav = dynamic_cast<const NavTree*>(&tree);
  if (!nav) throw StructuralError("navigation family tree is not a NavTree");
  return *nav;
}

}  // namespace

std::string state_name(const SearchTree& tree, StateId s) {
  if (tree.family() == Family::Nav) {
    std::string out;
    for (Cell c : as_nav(tree).path(s)) {
      if (!out.empty()) out += '>';
      out += cell_name(c);
    }
    return out;
  }
  std::string out = kRootName;
  const auto path = tree.root_path(s);
  for (std::size_t i = 1; i < path.size(); ++i) {
    out += ">i" + std::to_string(tree.child_index(path[i])) + "d" + std::to_string(i);
  }
  return out;
}

StateId resolve_state_name(const SearchTree& tree, const std::string& name) {
  const auto segs = split_on(name, '>');
  StateId cur = tree.root();
  if (tree.family() == Family::Nav) {
    const NavTree& nav = as_nav(tree);
    int x = 0, y = 0;
    if (!parse_pair(segs[0], 'x', 'y', x, y) || !(Cell{x, y} == nav.layout().start)) {
      throw ParseError("state '" + name + "' does not start at the maze start");
    }
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (!parse_pair(segs[i], 'x', 'y', x, y)) throw ParseError("bad vertex '" + segs[i] + "' in '" + name + "'");
      bool found = false;
      for (StateId c : tree.children(cur)) {
        if (nav.cell_of(c) == Cell{x, y}) {
          cur = c;
          found = true;
          break;
        }
      }
      if (!found) throw ParseError("state '" + name + "' is not a path of this maze");
    }
    return cur;
  }
  if (segs[0] != kRootName) throw ParseError("state '" + name + "' does not start at the root");
  for (std::size_t i = 1; i < segs.size(); ++i) {
    int idx = 0, depth = 0;
    if (!parse_pair(segs[i], 'i', 'd', idx, depth) || depth != static_cast<int>(i)) {
      throw ParseError("bad segment '" + segs[i] + "' in '" + name + "'");
    }
    const auto& kids = tree.children(cur);
    if (idx < 0 || static_cast<std::size_t>(idx) >= kids.size()) {
      throw ParseError("state '" + name + "' is not in this tree");
    }
    cur = kids[static_cast<std::size_t>(idx)];
  }
  return cur;
}

std::vector<std::string> split_path_name(const std::string& name) {
  std::vector<std::string> out;
  const auto segs = split_on(name, '>');
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i > 0) out.emplace_back(">");
    out.push_back(segs[i]);
  }
  return out;
}

}  // namespace treebandit
