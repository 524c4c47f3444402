#include "tracecodec/theoretical.hpp"

#include <charconv>

#include "core/errors.hpp"

namespace treebandit {

std::string SlotNamer::name(StateId s) {
  auto [it, fresh] = slot_.emplace(s, slot_.size());
  return "S" + std::to_string(it->second);
}

std::string value_token(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return "V" + std::string(buf, res.ptr);
}

double parse_theoretical_value(const std::string& token) {
  if (token.size() < 2 || token[0] != 'V') throw ParseError("'" + token + "' is not a value token");
  double v = 0.0;
  const auto res = std::from_chars(token.data() + 1, token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ParseError("'" + token + "' is not a value token");
  }
  return v;
}

namespace {

void emit_feedback(TraceRecord& rec, SlotNamer& names, const StepRecord& step) {
  rec.tokens.push_back({TokenKind::Marker, "%"});
  rec.tokens.push_back({TokenKind::Value, value_token(step.value)});
  rec.tokens.push_back({TokenKind::Marker, "#"});
  for (StateId c : step.children) rec.tokens.push_back({TokenKind::State, names.name(c)});
}

}  // namespace

TraceRecord encode_leaf_theoretical(const Trajectory& t) {
  TraceRecord rec;
  rec.format = TraceFormat::LeafTheoretical;
  SlotNamer names;
  for (const auto& step : t.steps) {
    rec.tokens.push_back({TokenKind::Marker, "?"});
    rec.tokens.push_back({TokenKind::State, names.name(step.state)});
    emit_feedback(rec, names, step);
  }
  return rec;
}

TraceRecord encode_tree_theoretical(const Trajectory& t, const std::vector<std::vector<StateId>>& paths) {
  if (paths.size() != t.steps.size()) throw StructuralError("one path per step is required");
  TraceRecord rec;
  rec.format = TraceFormat::TreeTheoretical;
  rec.tokens.push_back({TokenKind::Marker, "[BOS]"});
  SlotNamer names;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& path = paths[i];
    if (path.empty() || path.back() != t.steps[i].state) {
      throw StructuralError("path " + std::to_string(i) + " does not end at the selected state");
    }
    rec.tokens.push_back({TokenKind::Marker, "?"});
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k > 0) rec.tokens.push_back({TokenKind::Marker, ">"});
      rec.tokens.push_back({TokenKind::State, names.name(path[k])});
    }
    emit_feedback(rec, names, t.steps[i]);
  }
  return rec;
}

}  // namespace treebandit
