#include "hardattn/model.hpp"

#include <algorithm>
#include <sstream>

#include "core/errors.hpp"

namespace treebandit {

namespace {

constexpr std::pair<TokenFn, std::string_view> kFnNames[] = {
    {TokenFn::Zero, "zero"},
    {TokenFn::LeafMark, "leaf-mark"},
    {TokenFn::LeafScore, "leaf-score"},
    {TokenFn::TreePositions, "tree-positions"},
    {TokenFn::TreeClosest, "tree-closest"},
    {TokenFn::TreeIterationStats, "tree-iteration-stats"},
    {TokenFn::TreeAggregate, "tree-aggregate"},
    {TokenFn::TreeSelected, "tree-selected"},
    {TokenFn::TreeParentPos, "tree-parent-pos"},
    {TokenFn::TreeParentId, "tree-parent-id"},
    {TokenFn::TreeAncestors, "tree-ancestors"},
    {TokenFn::TreeRevealed, "tree-revealed"},
    {TokenFn::TreeScore, "tree-score"},
    {TokenFn::TreeRoot, "tree-root"},
    {TokenFn::TreeContinue, "tree-continue"},
};

constexpr std::string_view kMagic = "treebandit-hardattn 1";

template <class T>
std::vector<T> hardmax_impl(const std::vector<T>& z, T one) {
  if (z.empty()) throw ParameterError("hardmax of an empty vector");
  const T best = *std::max_element(z.begin(), z.end());
  long long ties = 0;
  for (const T& v : z) ties += v == best ? 1 : 0;
  std::vector<T> out(z.size(), T(0));
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == best) out[i] = one / T(ties);
  }
  return out;
}

void write_terms(std::ostream& out, char tag, const std::vector<CopyTerm>& terms, const RegisterLayout& layout,
                 bool register_dst) {
  for (const auto& t : terms) {
    out << "  " << tag << ' ' << layout.name(t.src) << ' ';
    if (register_dst) {
      out << layout.name(t.dst);
    } else {
      out << t.dst;
    }
    out << ' ' << t.coef << '\n';
  }
}

[[noreturn]] void bad(int line, const std::string& why) {
  throw ParseError("model text line " + std::to_string(line) + ": " + why);
}

}  // namespace

std::string_view token_fn_name(TokenFn fn) {
  for (const auto& [f, name] : kFnNames) {
    if (f == fn) return name;
  }
  return "?";
}

TokenFn parse_token_fn(std::string_view name) {
  for (const auto& [f, n] : kFnNames) {
    if (n == name) return f;
  }
  throw ParseError("unknown token function '" + std::string(name) + "'");
}

std::vector<Rational> hardmax(const std::vector<Rational>& z) { return hardmax_impl<Rational>(z, Rational(1)); }
std::vector<double> hardmax(const std::vector<double>& z) { return hardmax_impl<double>(z, 1.0); }

std::string HardAttnModel::to_text() const {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "family " << (family == ModelFamily::Leaf ? "leaf" : "tree") << '\n';
  out << "policy " << policy_name(policy) << '\n';
  out << "budget " << budget << '\n' << "branching " << branching << '\n';
  out << "sentinel " << sentinel << '\n' << "offset " << offset << '\n';
  for (int c = 0; c < layout.size();) {
    const std::string& n = layout.name(c);
    const auto dot = n.find('.');
    if (dot == std::string::npos) {
      out << "scalar " << n << '\n';
      ++c;
    } else {
      const auto b = layout.block(n.substr(0, dot));
      out << "block " << n.substr(0, dot) << ' ' << b.width << '\n';
      c += b.width;
    }
  }
  for (const auto& e : embedding) {
    out << "embed " << e.token_class;
    for (const auto& [reg, v] : e.fixed) out << ' ' << layout.name(reg) << '=' << v;
    if (e.alpha >= 0) out << " alpha=" << layout.name(e.alpha);
    if (!e.onehot.empty()) out << " onehot=" << e.onehot;
    out << '\n';
  }
  for (const auto& l : layers) {
    out << "layer " << l.name << '\n';
    write_terms(out, 'q', l.q, layout, false);
    write_terms(out, 'k', l.k, layout, false);
    write_terms(out, 'v', l.v, layout, true);
    out << "  fn " << token_fn_name(l.fn) << '\n';
    out << "  writes";
    for (int w : l.writes) out << ' ' << layout.name(w);
    out << "\nend\n";
  }
  for (const auto& [reg, tok] : unembedding) out << "unembed " << layout.name(reg) << ' ' << tok << '\n';
  out << "outputs";
  for (const auto& t : output_tokens) out << ' ' << t;
  out << '\n';
  return out.str();
}

HardAttnModel HardAttnModel::from_text(const std::string& text) {
  HardAttnModel m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != kMagic) throw ParseError("not a hard-attention model file");
  ++lineno;
  Layer* cur = nullptr;
  bool have_family = false, have_outputs = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    try {
      if (cur) {
        if (key == "q" || key == "k" || key == "v") {
          std::string src, dst;
          int coef = 0;
          if (!(ls >> src >> dst >> coef)) bad(lineno, "copy term needs src dst coef");
          CopyTerm t{m.layout.index(src), key == "v" ? m.layout.index(dst) : std::stoi(dst), coef};
          (key == "q" ? cur->q : key == "k" ? cur->k : cur->v).push_back(t);
        } else if (key == "fn") {
          std::string name;
          ls >> name;
          cur->fn = parse_token_fn(name);
        } else if (key == "writes") {
          std::string name;
          while (ls >> name) cur->writes.push_back(m.layout.index(name));
        } else if (key == "end") {
          cur = nullptr;
        } else {
          bad(lineno, "unexpected '" + key + "' inside a layer");
        }
        continue;
      }
      if (key == "family") {
        std::string f;
        ls >> f;
        if (f != "leaf" && f != "tree") bad(lineno, "family must be leaf or tree");
        m.family = f == "leaf" ? ModelFamily::Leaf : ModelFamily::Tree;
        have_family = true;
      } else if (key == "policy") {
        std::string p;
        ls >> p;
        m.policy = parse_policy(p);
      } else if (key == "budget") {
        ls >> m.budget;
      } else if (key == "branching") {
        ls >> m.branching;
      } else if (key == "sentinel" || key == "offset") {
        std::string r;
        ls >> r;
        (key == "sentinel" ? m.sentinel : m.offset) = Rational::parse(r);
      } else if (key == "scalar") {
        std::string n;
        ls >> n;
        m.layout.add_scalar(n);
      } else if (key == "block") {
        std::string n;
        int w = 0;
        if (!(ls >> n >> w)) bad(lineno, "block needs a name and a width");
        m.layout.add_block(n, w);
      } else if (key == "embed") {
        EmbedRule e;
        ls >> e.token_class;
        std::string item;
        while (ls >> item) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) bad(lineno, "embedding entry '" + item + "' is not reg=value");
          const std::string lhs = item.substr(0, eq), rhs = item.substr(eq + 1);
          if (lhs == "alpha") {
            e.alpha = m.layout.index(rhs);
          } else if (lhs == "onehot") {
            m.layout.block(rhs);
            e.onehot = rhs;
          } else {
            e.fixed.emplace_back(m.layout.index(lhs), Rational::parse(rhs));
          }
        }
        m.embedding.push_back(std::move(e));
      } else if (key == "layer") {
        m.layers.emplace_back();
        ls >> m.layers.back().name;
        cur = &m.layers.back();
      } else if (key == "unembed") {
        std::string reg, tok;
        if (!(ls >> reg >> tok)) bad(lineno, "unembed needs a register and a token");
        m.unembedding.emplace_back(m.layout.index(reg), tok);
      } else if (key == "outputs") {
        std::string tok;
        while (ls >> tok) m.output_tokens.push_back(tok);
        have_outputs = true;
      } else {
        bad(lineno, "unknown directive '" + key + "'");
      }
    } catch (const ParameterError& e) {
      bad(lineno, e.what());
    } catch (const std::invalid_argument&) {
      bad(lineno, "malformed number");
    } catch (const std::out_of_range&) {
      bad(lineno, "number out of range");
    }
  }
  if (cur) throw ParseError("model text ends inside layer '" + cur->name + "'");
  if (!have_family || !have_outputs || m.budget < 1 || m.branching < 1) {
    throw ParseError("model text is missing its header or outputs");
  }
  return m;
}

}  // namespace treebandit
