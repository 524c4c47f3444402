#include "envs/instance.hpp"

#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace treebandit {

using nlohmann::json;

namespace {

json cell_json(Cell c) { return json::array({c.x, c.y}); }

Cell cell_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("cell must be [x, y]");
  return Cell{j.at(0).get<int>(), j.at(1).get<int>()};
}

json layout_json(const NavLayout& l) {
  json walls = json::array();
  for (Cell w : l.walls) walls.push_back(cell_json(w));
  json goals = json::array();
  for (const auto& g : l.goals) goals.push_back({{"cell", cell_json(g.cell)}, {"reward", g.reward}});
  return {{"width", l.width}, {"height", l.height}, {"max_path_len", l.max_path_len},
          {"start", cell_json(l.start)}, {"walls", walls}, {"goals", goals}};
}

NavLayout layout_from(const json& j) {
  NavLayout l;
  l.width = j.at("width").get<int>();
  l.height = j.at("height").get<int>();
  l.max_path_len = j.at("max_path_len").get<int>();
  l.start = cell_from(j.at("start"));
  for (const auto& w : j.at("walls")) l.walls.push_back(cell_from(w));
  for (const auto& g : j.at("goals")) l.goals.push_back({cell_from(g.at("cell")), g.at("reward").get<double>()});
  return l;
}

bool same_layout(const NavLayout& a, const NavLayout& b) {
  return a.width == b.width && a.height == b.height && a.max_path_len == b.max_path_len && a.start == b.start &&
         a.walls == b.walls && a.goals == b.goals;
}

}  // namespace

Instance Instance::tree(const TreeSpec& spec) {
  Instance inst;
  inst.family_ = Family::Tree;
  inst.tree_ = std::make_shared<const TreeInstance>(generate_tree(spec));
  return inst;
}

Instance Instance::nav(const NavSpec& spec) {
  Instance inst;
  inst.family_ = Family::Nav;
  inst.nav_ = std::make_shared<const NavInstance>(generate_nav(spec));
  return inst;
}

Instance Instance::nav_layout(const NavLayout& layout) {
  validate_layout(layout);
  Instance inst;
  inst.family_ = Family::Nav;
  inst.explicit_layout_ = true;
  NavSpec spec;
  spec.width = layout.width;
  spec.height = layout.height;
  spec.max_path_len = layout.max_path_len;
  spec.start = layout.start;
  spec.num_goals = static_cast<int>(layout.goals.size());
  for (const auto& g : layout.goals) spec.goal_rewards.push_back(g.reward);
  spec.wall_density = static_cast<double>(layout.walls.size()) / (layout.width * layout.height);
  inst.nav_ = std::make_shared<const NavInstance>(NavInstance{spec, layout});
  return inst;
}

std::shared_ptr<const SearchTree> Instance::make_tree() const {
  if (family_ == Family::Tree) return std::shared_ptr<const SearchTree>(tree_, &tree_->tree);
  return std::make_shared<const NavTree>(nav_->layout);
}

std::uint64_t Instance::seed() const { return family_ == Family::Tree ? tree_->spec.seed : nav_->spec.seed; }

json Instance::to_json() const {
  if (family_ == Family::Tree) {
    const auto& s = tree_->spec;
    json goals = json::array();
    for (const auto& g : tree_->goals) goals.push_back({{"state", g.state.value}, {"reward", g.reward}});
    return {{"family", "tree"},        {"seed", s.seed},         {"branching", s.branching},
            {"depth", s.depth},        {"num_goals", s.num_goals}, {"goal_rewards", s.goal_rewards},
            {"goals", goals}};
  }
  const auto& s = nav_->spec;
  json j = {{"family", "nav"},
            {"seed", s.seed},
            {"width", s.width},
            {"height", s.height},
            {"wall_density", s.wall_density},
            {"num_goals", s.num_goals},
            {"goal_rewards", s.goal_rewards},
            {"max_path_len", s.max_path_len},
            {"start", cell_json(s.start)},
            {"generated", !explicit_layout_},
            {"layout", layout_json(nav_->layout)}};
  return j;
}

Instance Instance::from_json(const json& j) {
  try {
    const Family family = parse_family(j.at("family").get<std::string>());
    if (family == Family::Tree) {
      TreeSpec spec;
      spec.seed = j.at("seed").get<std::uint64_t>();
      spec.branching = j.at("branching").get<int>();
      spec.depth = j.at("depth").get<int>();
      spec.num_goals = j.at("num_goals").get<int>();
      spec.goal_rewards = j.at("goal_rewards").get<std::vector<double>>();
      Instance inst = tree(spec);
      if (j.contains("goals")) {
        std::vector<GoalAssignment> stored;
        for (const auto& g : j.at("goals")) {
          stored.push_back({StateId{g.at("state").get<std::uint32_t>()}, g.at("reward").get<double>()});
        }
        if (stored != inst.tree_->goals) throw ParseError("tree instance does not regenerate from its spec and seed");
      }
      return inst;
    }
    const NavLayout stored = layout_from(j.at("layout"));
    if (!j.value("generated", true)) return nav_layout(stored);
    NavSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.wall_density = j.at("wall_density").get<double>();
    spec.num_goals = j.at("num_goals").get<int>();
    spec.goal_rewards = j.at("goal_rewards").get<std::vector<double>>();
    spec.max_path_len = j.at("max_path_len").get<int>();
    spec.start = cell_from(j.at("start"));
    Instance inst = nav(spec);
    if (!same_layout(stored, inst.nav_->layout)) {
      throw ParseError("maze instance does not regenerate from its spec and seed");
    }
    return inst;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  }
}

void Instance::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Instance Instance::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace treebandit
