#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "hardattn/model.hpp"

namespace treebandit {

namespace {

class Builder {
 public:
  explicit Builder(HardAttnModel& m) : m_(m) {}

  int r(const std::string& name) const { return m_.layout.index(name); }

  std::vector<CopyTerm> one(const std::string& src, int dst = 0) const { return {CopyTerm{r(src), dst, 1}}; }

  std::vector<CopyTerm> copy(const std::string& src, const std::string& dst) const {
    return {CopyTerm{r(src), r(dst), 1}};
  }

  /// src.i -> dst.i for every slot.
  std::vector<CopyTerm> block_copy(const std::string& src, const std::string& dst) const {
    std::vector<CopyTerm> out;
    for (int i = 0; i < m_.slots(); ++i) out.push_back({m_.layout.at(src, i), m_.layout.at(dst, i), 1});
    return out;
  }

  /// src.i -> score coordinate i.
  std::vector<CopyTerm> block_score(const std::string& src) const {
    std::vector<CopyTerm> out;
    for (int i = 0; i < m_.slots(); ++i) out.push_back({m_.layout.at(src, i), i, 1});
    return out;
  }

  std::vector<int> regs(std::initializer_list<std::string> names) const {
    std::vector<int> out;
    for (const auto& n : names) {
      if (m_.layout.has_block(n)) {
        const auto b = m_.layout.block(n);
        for (int i = 0; i < b.width; ++i) out.push_back(b.start + i);
      } else {
        out.push_back(r(n));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void embed(const std::string& cls, std::initializer_list<std::pair<const char*, long long>> fixed, int alpha = -1,
             std::string onehot = {}) {
    EmbedRule rule{cls, {}, alpha, std::move(onehot)};
    for (const auto& [name, v] : fixed) rule.fixed.emplace_back(r(name), Rational(v));
    m_.embedding.push_back(std::move(rule));
  }

  void layer(std::string name, std::vector<CopyTerm> q, std::vector<CopyTerm> k, std::vector<CopyTerm> v, TokenFn fn,
             std::vector<int> writes) {
    m_.layers.push_back(Layer{std::move(name), std::move(q), std::move(k), std::move(v), fn, std::move(writes)});
  }

 private:
  HardAttnModel& m_;
};

void check_size(int budget, int branching) {
  if (budget < 1 || branching < 1) throw ParameterError("model needs T >= 1 and B >= 1");
  if (static_cast<long long>(budget) * branching > 100000) throw ParameterError("model too large");
}

std::vector<CopyTerm> concat(std::vector<CopyTerm> a, const std::vector<CopyTerm>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

HardAttnModel build_leaf_model(int budget, int branching, PolicyKind kind) {
  check_size(budget, branching);
  if (kind != PolicyKind::UniformLeaf && kind != PolicyKind::GreedyLeaf) {
    throw ParameterError("leaf construction covers uniform-leaf and greedy-leaf only");
  }
  HardAttnModel m;
  m.family = ModelFamily::Leaf;
  m.policy = make_policy(kind);
  m.budget = budget;
  m.branching = branching;
  for (const char* name : {"value", "sep", "isValue", "isSep", "isState", "bias", "isVisited", "inhValue", "pos"}) {
    m.layout.add_scalar(name);
  }
  m.layout.add_block("id", m.slots());

  Builder b(m);
  // Uniform sampling: every value token embeds the same constant.
  b.embed("value", {{"isValue", 1}, {"bias", 1}}, kind == PolicyKind::GreedyLeaf ? b.r("value") : -1);
  b.embed("#", {{"sep", 1}, {"isSep", 1}, {"bias", 1}});
  b.embed("?", {{"sep", -1}, {"isSep", 1}, {"bias", 1}});
  b.embed("%", {{"bias", 1}});
  b.embed("state", {{"isState", 1}, {"bias", 1}}, -1, "id");

  b.layer("mark-visited", b.one("bias"), b.one("isSep"), b.copy("sep", "isVisited"), TokenFn::LeafMark,
          b.regs({"isVisited", "isValue"}));
  b.layer("inherit-value", b.one("bias"), b.one("isValue"), b.copy("value", "inhValue"), TokenFn::LeafScore,
          b.regs({"inhValue", "id"}));
  b.layer("select-max", b.one("bias"), b.one("isState"), b.block_copy("id", "id"), TokenFn::Zero, b.regs({"id"}));

  m.output_tokens = {"?", "%", "#"};
  for (int i = 0; i < m.slots(); ++i) {
    m.output_tokens.push_back("S" + std::to_string(i));
    m.unembedding.emplace_back(m.layout.at("id", i), "S" + std::to_string(i));
  }
  return m;
}

HardAttnModel build_tree_model(int budget, int branching, const Policy& policy) {
  check_size(budget, branching);
  if (!policy.is_path()) throw ParameterError("tree construction covers path policies only");
  if (policy.kind == PolicyKind::PathUCT && !(policy.c >= 0.0 && std::isfinite(policy.c))) {
    throw ParameterError("UCT constant must be finite and non-negative");
  }
  if (policy.successors == SuccessorRule::Modified && policy.exclusion != ExclusionRule::Recursive) {
    throw UnsupportedModeError("tree construction implements recursive exclusion only");
  }
  const bool modified = policy.successors == SuccessorRule::Modified;
  HardAttnModel m;
  m.family = ModelFamily::Tree;
  m.policy = policy;
  m.budget = budget;
  m.branching = branching;
  for (const char* name : {"value", "sep", "isValue", "isSep", "isGt", "isQ", "isBos", "isSepBos", "isState", "bias",
                           "qpos", "vpos", "spos", "closestQ", "parentpos", "isSelected", "wasSelected", "iter",
                           "pos"}) {
    m.layout.add_scalar(name);
  }
  if (modified) {
    m.layout.add_scalar("selQ");
    m.layout.add_scalar("rcnt");
  }
  for (const char* name : {"id", "vid", "cid", "avid", "acid", "pid", "psid", "nsid"}) m.layout.add_block(name, m.slots());
  if (modified) {
    m.layout.add_block("anc", m.slots());
    m.layout.add_block("rev", m.slots());
  }
  // Two extra output slots: ">" then "%".
  m.layout.add_block("oid", m.slots() + 2);

  // Counts never exceed T + 1 and values lie in [0, 1].
  const long long t = budget;
  switch (policy.kind) {
    case PolicyKind::UniformPath: m.offset = 1; m.sentinel = 1; break;
    case PolicyKind::PathGreedy: m.offset = 1; m.sentinel = t + 3; break;
    case PolicyKind::PathPureExploration: m.offset = t + 2; m.sentinel = t + 3; break;
    default: {
      const double explore = policy.c * std::sqrt(std::log(2.0 * static_cast<double>(t + 2)));
      m.offset = 1;
      m.sentinel = 3 + static_cast<long long>(std::ceil(explore));
    }
  }

  Builder b(m);
  b.embed("value", {{"isValue", 1}, {"bias", 1}}, b.r("value"));
  b.embed("#", {{"sep", 1}, {"isSep", 1}, {"isSepBos", 1}, {"bias", 1}});
  b.embed("?", {{"sep", -1}, {"isSep", 1}, {"isQ", 1}, {"bias", 1}});
  b.embed(">", {{"isGt", 1}, {"bias", 1}});
  b.embed("[BOS]", {{"isBos", 1}, {"isSepBos", 1}, {"bias", 1}});
  b.embed("%", {{"bias", 1}});
  b.embed("state", {{"isState", 1}, {"bias", 1}}, -1, "id");

  const int extra = m.slots();
  b.layer("iteration-counter", b.one("bias"), b.one("isSepBos"), b.copy("isBos", "iter"), TokenFn::TreePositions,
          b.regs({"iter", "qpos", "spos", "vpos"}));
  b.layer("closest-query", b.one("bias"), b.one("qpos"), b.copy("pos", "closestQ"), TokenFn::TreeClosest,
          b.regs({"closestQ"}));
  b.layer("iteration-stats", b.one("bias"), b.one("closestQ"),
          concat(b.block_copy("id", "vid"), b.block_copy("id", "cid")), TokenFn::TreeIterationStats,
          b.regs({"vid", "cid"}));
  b.layer("backpropagate", b.one("bias"), b.one("isValue"),
          concat(b.block_copy("vid", "avid"), b.block_copy("cid", "acid")), TokenFn::TreeAggregate,
          b.regs({"avid", "acid"}));
  b.layer("selected-states", b.one("bias"), b.one("isSep"), b.copy("sep", "isSelected"), TokenFn::TreeSelected,
          b.regs({"isSelected"}));
  b.layer("parent-position", {}, {}, {}, TokenFn::TreeParentPos,
          modified ? b.regs({"parentpos", "selQ"}) : b.regs({"parentpos"}));
  b.layer("parent-id", b.one("bias"), b.one("parentpos"), b.block_copy("id", "pid"), TokenFn::TreeParentId,
          b.regs({"pid"}));
  b.layer("previous-state", b.one("bias"), b.one("spos"), b.block_copy("id", "psid"), TokenFn::Zero, b.regs({"psid"}));
  // [BOS] answers every query at score 1 so a childless state reads nothing.
  b.layer("children", concat(b.block_score("psid"), b.one("bias", extra)),
          concat(b.block_score("pid"), b.one("isBos", extra)), b.block_copy("id", "nsid"), TokenFn::Zero,
          b.regs({"nsid"}));
  if (modified) {
    b.layer("ancestors", b.one("bias"), b.one("selQ"), b.block_copy("id", "anc"), TokenFn::TreeAncestors,
            b.regs({"anc"}));
    b.layer("revealed-below", b.one("bias"), concat(b.one("isState"), b.one("isBos")),
            concat(b.block_copy("anc", "rev"), b.copy("isBos", "rcnt")), TokenFn::TreeRevealed, b.regs({"rev", "rcnt"}));
  }
  b.layer("score", b.one("bias"), b.one("vpos"), concat(b.block_copy("avid", "avid"), b.block_copy("acid", "acid")),
          TokenFn::TreeScore, b.regs({"avid", "acid", "oid"}));
  b.layer("start-state", {}, {}, {}, TokenFn::TreeRoot, {m.layout.at("oid", 0)});
  // [BOS] also matches the root slot, so a first occurrence always reads 1/2.
  b.layer("continue-or-stop", b.block_score("id"), concat(b.block_score("id"), b.one("isBos", 0)),
          b.copy("isSelected", "wasSelected"), TokenFn::TreeContinue,
          {b.r("wasSelected"), m.layout.at("oid", extra), m.layout.at("oid", extra + 1)});

  m.output_tokens = {"[BOS]", "?", "%", "#", ">"};
  for (int i = 0; i < m.slots(); ++i) {
    m.output_tokens.push_back("S" + std::to_string(i));
    m.unembedding.emplace_back(m.layout.at("oid", i), "S" + std::to_string(i));
  }
  m.unembedding.emplace_back(m.layout.at("oid", extra), ">");
  m.unembedding.emplace_back(m.layout.at("oid", extra + 1), "%");
  return m;
}

HardAttnModel build_model(int budget, int branching, const Policy& policy) {
  if (policy.is_path()) return build_tree_model(budget, branching, policy);
  if (policy.leaf_ties != GreedyLeafTies::Pooled) {
    throw UnsupportedModeError("a hardmax decoder cannot express parent-first tie breaking");
  }
  return build_leaf_model(budget, branching, policy.kind);
}

}  // namespace treebandit
