#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/rational.hpp"
#include "hardattn/layout.hpp"
#include "search/policy.hpp"

namespace treebandit {

/// `coef` times register `src` lands in coordinate `dst`. For Q and K the
/// destination is a score coordinate, for V it is a register. A matrix is a
/// sum of such terms, i.e. of the copy matrices e_dst e_src^T.
struct CopyTerm {
  int src = 0;
  int dst = 0;
  int coef = 1;
  friend bool operator==(const CopyTerm&, const CopyTerm&) = default;
};

/// Token-wise functions. Each one is exact and position independent; the
/// block adds its output to the attention result, so every function is
/// written here as "register := new value" on its write set.
enum class TokenFn {
  Zero,
  LeafMark,
  LeafScore,
  TreePositions,
  TreeClosest,
  TreeIterationStats,
  TreeAggregate,
  TreeSelected,
  TreeParentPos,
  TreeParentId,
  TreeAncestors,
  TreeRevealed,
  TreeScore,
  TreeRoot,
  TreeContinue,
};

std::string_view token_fn_name(TokenFn fn);
TokenFn parse_token_fn(std::string_view name);

struct Layer {
  std::string name;
  std::vector<CopyTerm> q, k, v;
  TokenFn fn = TokenFn::Zero;
  /// Registers this block may change; everything else passes through.
  std::vector<int> writes;
};

/// Initial embedding of one token class ("value", "#", "?", "%", ">",
/// "[BOS]", "state").
struct EmbedRule {
  std::string token_class;
  std::vector<std::pair<int, Rational>> fixed;
  /// Register receiving the token's value (value tokens), or -1.
  int alpha = -1;
  /// Block holding the one-hot state slot (state tokens), or empty.
  std::string onehot;
};

enum class ModelFamily { Leaf, Tree };

/// A hard-attention Transformer with hand-set weights.
struct HardAttnModel {
  ModelFamily family = ModelFamily::Leaf;
  Policy policy;
  int budget = 0;
  int branching = 0;
  /// Stand-in for an infinite score (tree models), and the floor added to
  /// finite candidate scores so they beat non-candidates.
  Rational sentinel;
  Rational offset;
  RegisterLayout layout;
  std::vector<EmbedRule> embedding;
  std::vector<Layer> layers;
  /// Register -> output token; other output tokens get logit 0.
  std::vector<std::pair<int, std::string>> unembedding;
  std::vector<std::string> output_tokens;

  int slots() const { return budget * branching + 1; }
  int dimension() const { return layout.size(); }

  std::string to_text() const;
  static HardAttnModel from_text(const std::string& text);
};

/// Three-layer construction for uniform or greedy leaf sampling; d = 10 + TB.
HardAttnModel build_leaf_model(int budget, int branching, PolicyKind kind);

/// Path-sampling construction. `policy.successors` picks the convention:
/// Plain (N(s)) gives the twelve-layer model, Modified (N*) adds two layers
/// that detect fully explored subtrees.
HardAttnModel build_tree_model(int budget, int branching, const Policy& policy);

/// Builds whichever construction matches `policy.kind`.
HardAttnModel build_model(int budget, int branching, const Policy& policy);

/// Applies a token-wise function to one column in place.
void apply_token_fn(const HardAttnModel& model, TokenFn fn, std::vector<Rational>& x);

std::vector<Rational> hardmax(const std::vector<Rational>& z);
std::vector<double> hardmax(const std::vector<double>& z);

}  // namespace treebandit
