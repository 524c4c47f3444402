#include "core/errors.hpp"
#include "hardattn/model.hpp"
#include "search/selection.hpp"

namespace treebandit {

namespace {

using Col = std::vector<Rational>;

struct View {
  const HardAttnModel& m;
  Col& x;

  Rational& operator[](const std::string& name) { return x[static_cast<std::size_t>(m.layout.index(name))]; }
  Rational& at(const std::string& block, int i) { return x[static_cast<std::size_t>(m.layout.at(block, i))]; }
  bool has(const std::string& name) const { return m.layout.has(name); }
};

Rational indicator(bool b) { return Rational(b ? 1 : 0); }

void leaf_score(View v) {
  if (v["isState"].is_zero()) return;
  const Rational score = v["isVisited"].is_zero() ? Rational(1) + v["inhValue"] : Rational(-3);
  for (int i = 0; i < v.m.slots(); ++i) {
    Rational& id = v.at("id", i);
    if (!id.is_zero()) id = score;
  }
}

std::int64_t to_count(const Rational& r) {
  if (!r.is_integer()) throw InvariantViolation("visit count register is not an integer");
  return static_cast<std::int64_t>(r.num());
}

Rational score_candidate(const HardAttnModel& m, const Rational& value, const Rational& count,
                         const Rational& parent_count) {
  switch (m.policy.kind) {
    case PolicyKind::UniformPath: return m.offset;
    case PolicyKind::PathGreedy: return m.offset + value;
    case PolicyKind::PathPureExploration: return m.offset - count;
    default: {
      const double u = uct_score(value, to_count(count), to_count(parent_count), m.policy.c);
      return m.offset + Rational::from_double(u);
    }
  }
}

void tree_score(View v) {
  if (v["isGt"] != Rational(1)) return;
  const HardAttnModel& m = v.m;
  const int n = m.slots();
  Rational parent;
  for (int k = 0; k < n; ++k) {
    if (!v.at("psid", k).is_zero()) parent += v.at("acid", k) * v.at("psid", k);
  }
  const bool modified = m.policy.successors == SuccessorRule::Modified;
  for (int i = 0; i < n; ++i) {
    Rational& out = v.at("oid", i);
    bool candidate = v.at("nsid", i).sign() > 0;
    if (candidate && modified) candidate = (v.at("rev", i) - v.at("acid", i)).sign() > 0;
    if (!candidate) {
      out = 0;
      continue;
    }
    const Rational& count = v.at("acid", i);
    if (count.is_zero() && m.policy.kind != PolicyKind::UniformPath) {
      out = m.sentinel;
      continue;
    }
    out = score_candidate(m, v.at("avid", i), count, parent);
    if (m.policy.kind != PolicyKind::UniformPath && out >= m.sentinel) {
      throw InvariantViolation("finite score reached the infinity sentinel");
    }
  }
}

}  // namespace

void apply_token_fn(const HardAttnModel& m, TokenFn fn, Col& x) {
  View v{m, x};
  const int n = m.slots();
  switch (fn) {
    case TokenFn::Zero: return;
    case TokenFn::LeafMark: v["isValue"] = v["isValue"] * v["pos"]; return;
    case TokenFn::LeafScore: leaf_score(v); return;
    case TokenFn::TreePositions: {
      v["qpos"] = v["isQ"] * v["pos"];
      v["spos"] = v["isState"] * v["pos"];
      v["vpos"] = v["isValue"] * v["pos"];
      Rational& it = v["iter"];
      it = it.sign() > 0 ? Rational(1) / it : Rational(0);
      return;
    }
    case TokenFn::TreeClosest: v["closestQ"] = v["closestQ"] * v["isState"]; return;
    case TokenFn::TreeIterationStats: {
      const Rational is_value = v["isValue"];
      const Rational value = v["value"];
      for (int i = 0; i < n; ++i) {
        Rational& vid = v.at("vid", i);
        Rational& cid = v.at("cid", i);
        vid = is_value * value * indicator(vid.sign() > 0);
        cid = is_value * indicator(cid.sign() > 0);
      }
      return;
    }
    case TokenFn::TreeAggregate: {
      const Rational scale = v["isValue"] * v["iter"];
      for (int i = 0; i < n; ++i) {
        v.at("avid", i) *= scale;
        v.at("acid", i) *= scale;
      }
      return;
    }
    case TokenFn::TreeSelected:
      v["isSelected"] = v["isState"] * indicator(!v["isSelected"].is_zero());
      return;
    case TokenFn::TreeParentPos:
      v["parentpos"] = v["isState"] * v["isSelected"] * v["pos"];
      if (v.has("selQ")) v["selQ"] = v["closestQ"] * v["isSelected"];
      return;
    case TokenFn::TreeParentId: {
      const Rational keep = Rational(2) * v["isState"] * (Rational(1) - v["isSelected"]);
      for (int i = 0; i < n; ++i) v.at("pid", i) *= keep;
      return;
    }
    case TokenFn::TreeAncestors: {
      const Rational child = v["isState"] * (Rational(1) - v["isSelected"]);
      for (int i = 0; i < n; ++i) {
        Rational& a = v.at("anc", i);
        a = child * (indicator(a.sign() > 0) + v.at("id", i));
      }
      return;
    }
    case TokenFn::TreeRevealed: {
      Rational& cnt = v["rcnt"];
      const Rational gate = v["isGt"];
      for (int i = 0; i < n; ++i) {
        Rational& r = v.at("rev", i);
        r = cnt.is_zero() ? Rational(0) : gate * r / cnt;
      }
      cnt = 0;
      return;
    }
    case TokenFn::TreeScore: tree_score(v); return;
    case TokenFn::TreeRoot: v.at("oid", 0) += v["isQ"]; return;
    case TokenFn::TreeContinue: {
      const Rational ws = v["wasSelected"];
      const Rational half(1, 2);
      v.at("oid", n) = v["isState"] * indicator(ws > half);
      v.at("oid", n + 1) = v["isState"] * indicator(ws == half);
      return;
    }
  }
  throw InvariantViolation("unknown token function");
}

}  // namespace treebandit
