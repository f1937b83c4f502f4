#include "gnnv/sexpr.hpp"

#include <cctype>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

namespace gnnv {

namespace {

struct Node {
  // Leaf atom or parenthesized list.
  std::string atom;
  std::vector<Node> list;
  bool is_atom = false;
};

struct Tokenizer {
  const std::string& s;
  std::size_t pos = 0;

  explicit Tokenizer(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  }

  bool done() {
    skip_ws();
    return pos >= s.size();
  }

  Node parse() {
    skip_ws();
    if (pos >= s.size()) throw std::invalid_argument("unexpected end of formula text");
    if (s[pos] == '(') {
      ++pos;
      Node n;
      while (true) {
        skip_ws();
        if (pos >= s.size()) throw std::invalid_argument("unbalanced parenthesis");
        if (s[pos] == ')') {
          ++pos;
          return n;
        }
        n.list.push_back(parse());
      }
    }
    if (s[pos] == '"') {
      std::size_t end = s.find('"', pos + 1);
      if (end == std::string::npos) throw std::invalid_argument("unterminated string");
      Node n;
      n.is_atom = true;
      n.atom = s.substr(pos + 1, end - pos - 1);
      pos = end + 1;
      return n;
    }
    std::size_t start = pos;
    while (pos < s.size() && !std::isspace((unsigned char)s[pos]) && s[pos] != '(' && s[pos] != ')') {
      ++pos;
    }
    Node n;
    n.is_atom = true;
    n.atom = s.substr(start, pos - start);
    return n;
  }
};

Cmp parse_cmp(const std::string& s) {
  if (s == ">=") return Cmp::Ge;
  if (s == "<=") return Cmp::Le;
  if (s == "=" || s == "==") return Cmp::Eq;
  if (s == "!=") return Cmp::Ne;
  if (s == ">") return Cmp::Gt;
  if (s == "<") return Cmp::Lt;
  throw std::invalid_argument("unknown comparison: " + s);
}

Guard parse_guard(const std::string& s) {
  if (s == "out") return Guard::Out;
  if (s == "in") return Guard::In;
  if (s == "top") return Guard::Top;
  throw std::invalid_argument("unknown guard: " + s);
}

FormulaPtr build(const Node& n);

std::vector<PresTerm> build_pres_terms(const Node& n) {
  std::vector<PresTerm> terms;
  for (const auto& t : n.list) {
    if (t.is_atom || t.list.size() != 3) {
      throw std::invalid_argument("counting term must be (lambda guard body)");
    }
    PresTerm term;
    term.lambda = parse_rational(t.list[0].atom);
    term.guard = parse_guard(t.list[1].atom);
    term.body = build(t.list[2]);
    terms.push_back(std::move(term));
  }
  return terms;
}

FormulaPtr build(const Node& n) {
  if (n.is_atom) {
    if (n.atom == "top") return f_top();
    if (n.atom == "bot") return f_bot();
    throw std::invalid_argument("unknown atom: " + n.atom);
  }
  if (n.list.empty()) throw std::invalid_argument("empty formula");
  if (!n.list[0].is_atom) throw std::invalid_argument("formula head must be a symbol");
  const std::string& head = n.list[0].atom;
  auto args = [&](std::size_t k) {
    if (n.list.size() != k + 1) {
      throw std::invalid_argument(head + " expects " + std::to_string(k) + " arguments");
    }
  };
  if (head == "U") {
    args(1);
    int c = std::stoi(n.list[1].atom);
    if (c < 1) throw std::invalid_argument("colors are 1-based");
    return f_color(c - 1);
  }
  if (head == "not") {
    args(1);
    return f_not(build(n.list[1]));
  }
  if (head == "and" || head == "or") {
    std::vector<FormulaPtr> parts;
    for (std::size_t i = 1; i < n.list.size(); ++i) parts.push_back(build(n.list[i]));
    return head == "and" ? f_and(std::move(parts)) : f_or(std::move(parts));
  }
  if (head == "implies") {
    args(2);
    return f_implies(build(n.list[1]), build(n.list[2]));
  }
  if (head == "pres") {
    args(3);
    return f_pres(build_pres_terms(n.list[1]), parse_cmp(n.list[2].atom),
                  parse_rational(n.list[3].atom));
  }
  if (head == "twohop") {
    args(4);
    std::vector<TwoHopTerm> two_hop;
    for (const auto& t : n.list[1].list) {
      if (t.is_atom || t.list.size() != 4) {
        throw std::invalid_argument("two-hop term must be (lambda hop1 hop2 body)");
      }
      TwoHopTerm term;
      term.lambda = parse_rational(t.list[0].atom);
      term.hop1_out = parse_guard(t.list[1].atom) == Guard::Out;
      term.hop2_out = parse_guard(t.list[2].atom) == Guard::Out;
      term.body = build(t.list[3]);
      two_hop.push_back(std::move(term));
    }
    return f_twohop(std::move(two_hop), build_pres_terms(n.list[2]),
                    parse_cmp(n.list[3].atom), parse_rational(n.list[4].atom));
  }
  throw std::invalid_argument("unknown formula head: " + head);
}

}  // namespace

FormulaPtr parse_formula_sexpr(const std::string& text) {
  Tokenizer tok(text);
  Node n = tok.parse();
  if (!tok.done()) throw std::invalid_argument("trailing text after formula");
  return build(n);
}

}  // namespace gnnv
