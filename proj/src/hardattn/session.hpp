#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hardattn/model.hpp"

namespace treebandit {

/// Uniform over the argmax logits, as greedy decoding with random tie-breaks.
struct NextTokenDistribution {
  std::vector<std::string> support;
  std::vector<Rational> probabilities;
  Rational probability_of(const std::string& token) const;
};

/// Incremental forward pass. Attention is causal, so pushing a token only
/// computes that token's column; the keys and values of earlier positions
/// are cached per layer. pop() undoes the last push, which lets callers
/// branch over continuations without recomputing the prefix.
class Session {
 public:
  /// With `check_hygiene`, every block verifies that registers outside its
  /// write set come out unchanged and throws InvariantViolation otherwise.
  explicit Session(const HardAttnModel& model, bool check_hygiene = false);

  /// Throws ParseError for tokens outside the model vocabulary and
  /// CapacityError when a state slot exceeds TB.
  void push(const std::string& token);
  void pop();
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Logits for the position after the last token, in output_tokens order.
  std::vector<Rational> logits() const;
  NextTokenDistribution next() const;
  /// Final-layer value of `reg` at position `pos` (0-based).
  Rational register_at(std::size_t pos, int reg) const;

 private:
  using Sparse = std::vector<std::pair<int, Rational>>;
  struct Cached {
    Sparse k, v;
  };

  std::vector<Rational> embed(const std::string& token, std::size_t position) const;

  const HardAttnModel* model_;
  bool check_;
  std::vector<std::vector<char>> write_mask_;
  std::vector<std::string> tokens_;
  std::vector<std::vector<Cached>> cache_;
  std::vector<Sparse> final_;
};

}  // namespace treebandit
