#include "tracecodec/token.hpp"

#include <sstream>

#include "core/errors.hpp"
#include "tracecodec/empirical.hpp"

namespace treebandit {

std::string_view format_name(TraceFormat f) {
  switch (f) {
    case TraceFormat::LeafTheoretical: return "leaf-theoretical";
    case TraceFormat::TreeTheoretical: return "tree-theoretical";
    case TraceFormat::EmpiricalTree: return "empirical-tree";
    case TraceFormat::EmpiricalNav: return "empirical-nav";
  }
  return "?";
}

TraceFormat parse_format(std::string_view name) {
  for (TraceFormat f : {TraceFormat::LeafTheoretical, TraceFormat::TreeTheoretical, TraceFormat::EmpiricalTree,
                        TraceFormat::EmpiricalNav}) {
    if (format_name(f) == name) return f;
  }
  throw ParameterError("unknown trace format '" + std::string(name) + "'");
}

std::string render(const TraceRecord& rec) {
  std::string out;
  if (rec.format == TraceFormat::LeafTheoretical || rec.format == TraceFormat::TreeTheoretical) {
    for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
      if (i > 0) out += ' ';
      out += rec.tokens[i].text;
    }
    out += '\n';
    return out;
  }
  // start_of_iteration / frontier / selection marker + index / value
  bool line_open = false;
  for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
    const Token& tok = rec.tokens[i];
    if (tok.kind == TokenKind::Marker && tok.text == kStartMarker) {
      out += tok.text;
      out += '\n';
      line_open = false;
    } else if (tok.kind == TokenKind::Marker && tok.text == kSelectMarker) {
      if (line_open) out += '\n';
      out += tok.text;
      line_open = true;
    } else if (tok.kind == TokenKind::Value) {
      if (line_open) out += '\n';
      out += tok.text;
      out += '\n';
      line_open = false;
    } else {
      if (line_open) out += ' ';
      out += tok.text;
      line_open = true;
    }
  }
  if (line_open) out += '\n';
  return out;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace treebandit
