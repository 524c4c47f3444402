#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tracecodec/token.hpp"

namespace treebandit {

class Vocab {
 public:
  Vocab(TraceFormat format, std::vector<std::string> tokens);

  /// Empirical vocabularies. Index tokens cover the largest frontier a budget
  /// of T can produce.
  static Vocab empirical_tree(int branching, int depth, int budget);
  static Vocab empirical_nav(int width, int height, int budget);
  /// Theoretical vocabularies: markers, S0..S_{TB} and the 101 grid values.
  static Vocab leaf_theoretical(int budget, int branching);
  static Vocab tree_theoretical(int budget, int branching);

  TraceFormat format() const { return format_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& tok) const { return ids_.contains(tok); }
  int id(const std::string& tok) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Model-level token ids of a record; maze path words are split on ">".
  std::vector<int> encode(const TraceRecord& rec) const;

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  TraceFormat format_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace treebandit
