#include "tracecodec/empirical.hpp"

#include <cctype>

#include "core/errors.hpp"
#include "core/rational.hpp"
#include "tracecodec/names.hpp"

namespace treebandit {

std::string format_value(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw StructuralError("value outside [0, 1]");
  // Round half up on the exact binary value, not on a decimal approximation.
  const Rational scaled = Rational::from_double(v) * Rational(100) + Rational(1, 2);
  const auto cents = static_cast<int>(scaled.num() / scaled.den());
  std::string out = std::to_string(cents / 100) + ".";
  const int frac = cents % 100;
  if (frac < 10) out += '0';
  out += std::to_string(frac);
  return out;
}

double parse_value_token(const std::string& text) {
  if (text.size() != 4 || text[1] != '.' || (text[0] != '0' && text[0] != '1') || !std::isdigit(text[2]) ||
      !std::isdigit(text[3])) {
    throw ParseError("value token '" + text + "' is not on the 0.01 grid");
  }
  const int cents = (text[0] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
  if (cents > 100) throw ParseError("value token '" + text + "' exceeds 1.00");
  return cents / 100.0;
}

TraceRecord encode_empirical(const Trajectory& t, const SearchTree& tree) {
  if (t.steps.empty()) throw StructuralError("trajectory has no steps");
  TraceRecord rec;
  rec.format = tree.family() == Family::Nav ? TraceFormat::EmpiricalNav : TraceFormat::EmpiricalTree;
  Frontier f(t.steps.front());
  for (std::size_t i = 1; i < t.steps.size(); ++i) {
    const StepRecord& step = t.steps[i];
    const auto idx = f.index_of(step.state);
    if (!idx) throw StructuralError("step " + std::to_string(i) + " selects a state outside the frontier");
    rec.tokens.push_back({TokenKind::Marker, kStartMarker});
    for (std::size_t k = 0; k < f.size(); ++k) {
      rec.tokens.push_back({TokenKind::Index, std::to_string(k)});
      rec.tokens.push_back({TokenKind::State, state_name(tree, f.members()[k])});
    }
    rec.tokens.push_back({TokenKind::Marker, kSelectMarker});
    rec.tokens.push_back({TokenKind::Index, std::to_string(*idx)});
    rec.tokens.push_back({TokenKind::Value, format_value(step.value)});
    f.visit(step);
  }
  return rec;
}

std::string encode_empirical_text(const Trajectory& t, const SearchTree& tree) {
  return render(encode_empirical(t, tree));
}

namespace {

Trajectory decode_words(const std::vector<std::string>& w, const SearchTree& tree) {
  Trajectory t;
  t.steps.push_back(StepRecord{tree.root(), 0.0, tree.children(tree.root())});
  Frontier f(t.steps.front());
  std::size_t pos = 0;
  int iteration = 0;
  const auto need = [&](const char* what) -> const std::string& {
    if (pos >= w.size()) {
      throw ParseError("record truncated in iteration " + std::to_string(iteration) + " (expected " + what + ")");
    }
    return w[pos++];
  };
  while (pos < w.size()) {
    ++iteration;
    if (need("start marker") != kStartMarker) {
      throw ParseError("iteration " + std::to_string(iteration) + " does not begin with " + kStartMarker);
    }
    std::size_t listed = 0;
    for (;;) {
      const std::string& word = need("frontier entry or selection marker");
      if (word == kSelectMarker) break;
      if (word != std::to_string(listed)) {
        throw ParseError("iteration " + std::to_string(iteration) + ": expected index " + std::to_string(listed) +
                         ", got '" + word + "'");
      }
      const std::string& name = need("state");
      if (listed >= f.size() || state_name(tree, f.members()[listed]) != name) {
        throw ParseError("iteration " + std::to_string(iteration) + ": frontier entry '" + name +
                         "' does not match the replayed frontier");
      }
      ++listed;
    }
    if (listed != f.size()) {
      throw ParseError("iteration " + std::to_string(iteration) + " lists " + std::to_string(listed) +
                       " frontier states, expected " + std::to_string(f.size()));
    }
    const std::string& idx_text = need("selected index");
    std::size_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(idx_text, &used);
      if (used != idx_text.size()) throw std::invalid_argument(idx_text);
    } catch (const std::exception&) {
      throw ParseError("iteration " + std::to_string(iteration) + ": bad index '" + idx_text + "'");
    }
    if (idx >= f.size()) {
      throw ParseError("iteration " + std::to_string(iteration) + ": index " + idx_text + " out of range for " +
                       std::to_string(f.size()) + " frontier states");
    }
    const double value = parse_value_token(need("value"));
    const StateId s = f.members()[idx];
    StepRecord step{s, value, tree.children(s)};
    f.visit(step);
    t.steps.push_back(std::move(step));
  }
  return t;
}

}  // namespace

Trajectory decode_empirical(const std::string& text, const SearchTree& tree) {
  return decode_words(split_words(text), tree);
}

Trajectory decode_empirical(const TraceRecord& rec, const SearchTree& tree) {
  std::vector<std::string> w;
  w.reserve(rec.tokens.size());
  for (const auto& tok : rec.tokens) w.push_back(tok.text);
  return decode_words(w, tree);
}

}  // namespace treebandit
