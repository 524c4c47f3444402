#include "hardattn/session.hpp"

#include <algorithm>
#include <charconv>

#include "core/errors.hpp"
#include "tracecodec/theoretical.hpp"

namespace treebandit {

namespace {

using Sparse = std::vector<std::pair<int, Rational>>;

Sparse project(const std::vector<CopyTerm>& terms, const std::vector<Rational>& x) {
  Sparse out;
  for (const auto& t : terms) {
    const Rational& v = x[static_cast<std::size_t>(t.src)];
    if (v.is_zero()) continue;
    const Rational term = t.coef == 1 ? v : v * Rational(t.coef);
    const auto it = std::lower_bound(out.begin(), out.end(), t.dst,
                                     [](const auto& e, int d) { return e.first < d; });
    if (it != out.end() && it->first == t.dst) {
      it->second += term;
    } else {
      out.insert(it, {t.dst, term});
    }
  }
  std::erase_if(out, [](const auto& e) { return e.second.is_zero(); });
  return out;
}

Rational dot(const Sparse& a, const Sparse& b) {
  Rational s;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

bool parse_slot(const std::string& token, int& slot) {
  if (token.size() < 2 || token[0] != 'S') return false;
  const auto res = std::from_chars(token.data() + 1, token.data() + token.size(), slot);
  return res.ec == std::errc() && res.ptr == token.data() + token.size() && slot >= 0;
}

}  // namespace

Rational NextTokenDistribution::probability_of(const std::string& token) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == token) return probabilities[i];
  }
  return Rational();
}

Session::Session(const HardAttnModel& model, bool check_hygiene) : model_(&model), check_(check_hygiene) {
  for (const auto& l : model.layers) {
    std::vector<char> mask(static_cast<std::size_t>(model.dimension()), 0);
    for (int w : l.writes) mask.at(static_cast<std::size_t>(w)) = 1;
    write_mask_.push_back(std::move(mask));
  }
}

std::vector<Rational> Session::embed(const std::string& token, std::size_t position) const {
  const HardAttnModel& m = *model_;
  std::string cls = token;
  int slot = -1;
  double value = 0.0;
  if (parse_slot(token, slot)) {
    cls = "state";
  } else if (token.size() > 1 && token[0] == 'V') {
    value = parse_theoretical_value(token);
    cls = "value";
  }
  const auto rule = std::find_if(m.embedding.begin(), m.embedding.end(),
                                 [&](const EmbedRule& r) { return r.token_class == cls; });
  if (rule == m.embedding.end()) throw ParseError("token '" + token + "' is not in the model vocabulary");
  std::vector<Rational> x(static_cast<std::size_t>(m.dimension()));
  for (const auto& [reg, v] : rule->fixed) x[static_cast<std::size_t>(reg)] = v;
  if (rule->alpha >= 0) x[static_cast<std::size_t>(rule->alpha)] = Rational::from_double(value);
  if (!rule->onehot.empty()) {
    const auto b = m.layout.block(rule->onehot);
    if (slot >= b.width) {
      throw CapacityError("state token " + token + " exceeds the " + std::to_string(b.width) + " state slots");
    }
    x[static_cast<std::size_t>(b.start + slot)] = 1;
  }
  // Positions count from 1.
  x[static_cast<std::size_t>(m.layout.index("pos"))] += Rational(static_cast<long long>(position + 1));
  return x;
}

void Session::push(const std::string& token) {
  const HardAttnModel& m = *model_;
  const std::size_t p = tokens_.size();
  std::vector<Rational> x = embed(token, p);
  std::vector<Cached> cached(m.layers.size());
  std::vector<Rational> before;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const Layer& layer = m.layers[l];
    if (check_) before = x;
    cached[l] = Cached{project(layer.k, x), project(layer.v, x)};
    if (!layer.v.empty()) {
      const Sparse q = project(layer.q, x);
      // Scores against every earlier position and this one.
      std::vector<std::size_t> best;
      Rational best_score;
      for (std::size_t j = 0; j <= p; ++j) {
        const Sparse& k = j == p ? cached[l].k : cache_[j][l].k;
        const Rational s = dot(q, k);
        if (best.empty() || s > best_score) {
          best_score = s;
          best.assign(1, j);
        } else if (s == best_score) {
          best.push_back(j);
        }
      }
      Sparse acc;
      for (std::size_t j : best) {
        const Sparse& v = j == p ? cached[l].v : cache_[j][l].v;
        for (const auto& [reg, val] : v) {
          const auto it =
              std::lower_bound(acc.begin(), acc.end(), reg, [](const auto& e, int d) { return e.first < d; });
          if (it != acc.end() && it->first == reg) {
            it->second += val;
          } else {
            acc.insert(it, {reg, val});
          }
        }
      }
      const Rational share(1, static_cast<Rational::Int>(best.size()));
      for (const auto& [reg, val] : acc) x[static_cast<std::size_t>(reg)] += val * share;
    }
    apply_token_fn(m, layer.fn, x);
    if (check_) {
      for (std::size_t r = 0; r < x.size(); ++r) {
        if (!write_mask_[l][r] && x[r] != before[r]) {
          throw InvariantViolation("layer '" + layer.name + "' changed register " +
                                   m.layout.name(static_cast<int>(r)) + " outside its write set");
        }
      }
    }
  }
  Sparse fin;
  for (std::size_t r = 0; r < x.size(); ++r) {
    if (!x[r].is_zero()) fin.emplace_back(static_cast<int>(r), x[r]);
  }
  tokens_.push_back(token);
  cache_.push_back(std::move(cached));
  final_.push_back(std::move(fin));
}

void Session::pop() {
  if (tokens_.empty()) throw StructuralError("pop on an empty session");
  tokens_.pop_back();
  cache_.pop_back();
  final_.pop_back();
}

Rational Session::register_at(std::size_t pos, int reg) const {
  for (const auto& [r, v] : final_.at(pos)) {
    if (r == reg) return v;
  }
  return Rational();
}

std::vector<Rational> Session::logits() const {
  if (tokens_.empty()) throw StructuralError("no tokens to decode from");
  const HardAttnModel& m = *model_;
  std::vector<Rational> out(m.output_tokens.size());
  for (const auto& [reg, tok] : m.unembedding) {
    const auto it = std::find(m.output_tokens.begin(), m.output_tokens.end(), tok);
    if (it == m.output_tokens.end()) continue;
    out[static_cast<std::size_t>(it - m.output_tokens.begin())] += register_at(tokens_.size() - 1, reg);
  }
  return out;
}

NextTokenDistribution Session::next() const {
  const auto probs = hardmax(logits());
  NextTokenDistribution d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].is_zero()) continue;
    d.support.push_back(model_->output_tokens[i]);
    d.probabilities.push_back(probs[i]);
  }
  return d;
}

}  // namespace treebandit
