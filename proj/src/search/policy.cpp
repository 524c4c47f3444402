#include "search/policy.hpp"

#include <charconv>
#include <sstream>
#include <vector>

#include "core/errors.hpp"

namespace treebandit {

std::string_view policy_kind_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::UniformLeaf: return "uniform-leaf";
    case PolicyKind::GreedyLeaf: return "greedy-leaf";
    case PolicyKind::UniformPath: return "uniform-path";
    case PolicyKind::PathPureExploration: return "path-pure-exploration";
    case PolicyKind::PathGreedy: return "path-greedy";
    case PolicyKind::PathUCT: return "path-uct";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : kAllPolicyKinds) {
    if (policy_kind_name(k) == name) return k;
  }
  throw ParameterError("unknown policy '" + std::string(name) + "'");
}

std::string policy_name(const Policy& p) {
  std::ostringstream out;
  out << policy_kind_name(p.kind);
  if (p.kind == PolicyKind::PathUCT && p.c != 0.1) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, p.c);
    out << ":c=" << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  }
  if (p.kind == PolicyKind::GreedyLeaf && p.leaf_ties == GreedyLeafTies::ParentFirst) out << ":ties=parent";
  if (p.is_path() && p.successors == SuccessorRule::Plain) out << ":succ=plain";
  if (p.is_path() && p.exclusion == ExclusionRule::Literal) out << ":exclusion=literal";
  return out.str();
}

Policy parse_policy(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  Policy p{parse_policy_kind(parts[0])};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ParameterError("policy option '" + parts[i] + "' is not key=value");
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "c") {
      try {
        p.c = std::stod(val);
      } catch (const std::exception&) {
        throw ParameterError("bad UCT constant '" + val + "'");
      }
      if (!(p.c > 0.0)) throw ParameterError("UCT constant must be positive");
    } else if (key == "ties" && (val == "parent" || val == "pooled")) {
      p.leaf_ties = val == "parent" ? GreedyLeafTies::ParentFirst : GreedyLeafTies::Pooled;
    } else if (key == "succ" && (val == "plain" || val == "modified")) {
      p.successors = val == "plain" ? SuccessorRule::Plain : SuccessorRule::Modified;
    } else if (key == "exclusion" && (val == "literal" || val == "recursive")) {
      p.exclusion = val == "literal" ? ExclusionRule::Literal : ExclusionRule::Recursive;
    } else {
      throw ParameterError("unknown policy option '" + parts[i] + "'");
    }
  }
  return p;
}

}  // namespace treebandit
