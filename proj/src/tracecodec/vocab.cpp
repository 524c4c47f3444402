#include "tracecodec/vocab.hpp"

#include "core/errors.hpp"
#include "envs/nav_env.hpp"
#include "tracecodec/empirical.hpp"
#include "tracecodec/names.hpp"

namespace treebandit {

namespace {

void add_values(std::vector<std::string>& out, const std::string& prefix) {
  for (int cents = 0; cents <= 100; ++cents) out.push_back(prefix + format_value(cents / 100.0));
}

void add_indices(std::vector<std::string>& out, int count) {
  for (int i = 0; i < count; ++i) out.push_back(std::to_string(i));
}

void add_tree_names(std::vector<std::string>& out, int branching, int depth, const std::string& prefix, int d) {
  out.push_back(prefix);
  if (d == depth) return;
  for (int i = 0; i < branching; ++i) {
    add_tree_names(out, branching, depth, prefix + ">i" + std::to_string(i) + "d" + std::to_string(d + 1), d + 1);
  }
}

}  // namespace

Vocab::Vocab(TraceFormat format, std::vector<std::string> tokens) : format_(format), tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw StructuralError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocab Vocab::empirical_tree(int branching, int depth, int budget) {
  if (branching < 1 || depth < 0 || budget < 1) throw ParameterError("bad vocabulary parameters");
  std::vector<std::string> t{kStartMarker, kSelectMarker};
  add_indices(t, branching + budget * (branching - 1));
  add_values(t, "");
  add_tree_names(t, branching, depth, kRootName, 0);
  // Index and value tokens never collide with names ("r0d0..."), so the map stays bijective.
  return Vocab(TraceFormat::EmpiricalTree, std::move(t));
}

Vocab Vocab::empirical_nav(int width, int height, int budget) {
  if (width < 1 || height < 1 || budget < 1) throw ParameterError("bad vocabulary parameters");
  std::vector<std::string> t{kStartMarker, kSelectMarker, ">"};
  add_indices(t, 4 + budget * 3);
  add_values(t, "");
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) t.push_back(cell_name(Cell{x, y}));
  }
  return Vocab(TraceFormat::EmpiricalNav, std::move(t));
}

Vocab Vocab::leaf_theoretical(int budget, int branching) {
  std::vector<std::string> t{"?", "%", "#"};
  for (int i = 0; i <= budget * branching; ++i) t.push_back("S" + std::to_string(i));
  add_values(t, "V");
  return Vocab(TraceFormat::LeafTheoretical, std::move(t));
}

Vocab Vocab::tree_theoretical(int budget, int branching) {
  std::vector<std::string> t{"[BOS]", "?", "%", "#", ">"};
  for (int i = 0; i <= budget * branching; ++i) t.push_back("S" + std::to_string(i));
  add_values(t, "V");
  return Vocab(TraceFormat::TreeTheoretical, std::move(t));
}

int Vocab::id(const std::string& tok) const {
  const auto it = ids_.find(tok);
  if (it == ids_.end()) throw ParseError("unknown token '" + tok + "'");
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw ParseError("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const TraceRecord& rec) const {
  std::vector<int> out;
  for (const auto& tok : rec.tokens) {
    if (format_ == TraceFormat::EmpiricalNav && tok.kind == TokenKind::State) {
      for (const auto& part : split_path_name(tok.text)) out.push_back(id(part));
    } else {
      out.push_back(id(tok.text));
    }
  }
  return out;
}

nlohmann::json Vocab::to_json() const {
  return {{"format", std::string(format_name(format_))}, {"tokens", tokens_}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  try {
    return Vocab(parse_format(j.at("format").get<std::string>()), j.at("tokens").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed vocabulary: ") + e.what());
  }
}

}  // namespace treebandit
