#pragma once

#include <string>
#include <vector>

namespace treebandit {

enum class TokenKind { State, Value, Index, Marker };

struct Token {
  TokenKind kind = TokenKind::Marker;
  std::string text;
  friend bool operator==(const Token&, const Token&) = default;
};

enum class TraceFormat { LeafTheoretical, TreeTheoretical, EmpiricalTree, EmpiricalNav };

std::string_view format_name(TraceFormat f);
TraceFormat parse_format(std::string_view name);

struct TraceRecord {
  TraceFormat format = TraceFormat::EmpiricalTree;
  std::vector<Token> tokens;
};

/// Renders a record as text. Empirical records use the four-line iteration
/// layout; theoretical records are one space-separated line.
std::string render(const TraceRecord& rec);

/// Splits text into whitespace-separated words (empirical formats keep
/// navigation paths as single words here).
std::vector<std::string> split_words(const std::string& text);

}  // namespace treebandit
