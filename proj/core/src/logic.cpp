#include "gnnv/logic.hpp"

#include <map>
#include <stdexcept>

namespace gnnv {

namespace {

FormulaPtr make(Formula f) {
  return std::make_shared<const Formula>(std::move(f));
}

}  // namespace

FormulaPtr f_top() {
  static FormulaPtr top = make(Formula{});
  return top;
}

FormulaPtr f_bot() {
  static FormulaPtr bot = f_not(f_top());
  return bot;
}

FormulaPtr f_color(int c) {
  Formula f;
  f.op = Formula::Op::Color;
  f.color = c;
  return make(std::move(f));
}

FormulaPtr f_not(FormulaPtr a) {
  Formula f;
  f.op = Formula::Op::Not;
  f.left = std::move(a);
  return make(std::move(f));
}

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.op = Formula::Op::And;
  f.left = std::move(a);
  f.right = std::move(b);
  return make(std::move(f));
}

FormulaPtr f_and(std::vector<FormulaPtr> parts) {
  if (parts.empty()) return f_top();
  FormulaPtr acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = f_and(acc, parts[i]);
  return acc;
}

FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return f_not(f_and(f_not(std::move(a)), f_not(std::move(b))));
}

FormulaPtr f_or(std::vector<FormulaPtr> parts) {
  if (parts.empty()) return f_bot();
  FormulaPtr acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = f_or(acc, parts[i]);
  return acc;
}

FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return f_or(f_not(std::move(a)), std::move(b));
}

FormulaPtr f_pres(std::vector<PresTerm> terms, Cmp cmp, Rational delta) {
  Formula f;
  f.op = Formula::Op::Pres;
  f.terms = std::move(terms);
  f.cmp = cmp;
  f.delta = std::move(delta);
  return make(std::move(f));
}

FormulaPtr f_twohop(std::vector<TwoHopTerm> two_hop, std::vector<PresTerm> one_hop,
                    Cmp cmp, Rational delta) {
  for (const auto& t : one_hop) {
    if (t.guard == Guard::Top) {
      throw std::invalid_argument("two-hop quantifiers admit no top guard");
    }
  }
  Formula f;
  f.op = Formula::Op::TwoHop;
  f.two_hop = std::move(two_hop);
  f.one_hop = std::move(one_hop);
  f.cmp = cmp;
  f.delta = std::move(delta);
  return make(std::move(f));
}

FormulaPtr pres_two_sided(Rational l0, std::vector<PresTerm> lhs, Cmp cmp,
                          Rational r0, std::vector<PresTerm> rhs) {
  std::vector<PresTerm> terms = std::move(lhs);
  for (auto& t : rhs) {
    t.lambda = -t.lambda;
    terms.push_back(std::move(t));
  }
  return f_pres(std::move(terms), cmp, r0 - l0);
}

namespace {

bool compare(const Rational& value, Cmp cmp, const Rational& delta) {
  switch (cmp) {
    case Cmp::Ge: return value >= delta;
    case Cmp::Le: return value <= delta;
    case Cmp::Eq: return value == delta;
    case Cmp::Ne: return value != delta;
    case Cmp::Gt: return value > delta;
    case Cmp::Lt: return value < delta;
  }
  throw std::logic_error("bad comparison");
}

class Evaluator {
 public:
  explicit Evaluator(const Graph& g) : g_(g), out_adj_(g.n), in_adj_(g.n) {
    for (const auto& [u, v] : g.edges) {
      out_adj_[u].push_back(v);
      in_adj_[v].push_back(u);
    }
  }

  const std::vector<char>& eval(const FormulaPtr& phi) {
    auto it = cache_.find(phi.get());
    if (it != cache_.end()) return it->second;
    std::vector<char> r(g_.n, 0);
    switch (phi->op) {
      case Formula::Op::Top:
        r.assign(g_.n, 1);
        break;
      case Formula::Op::Color: {
        if (phi->color < 0 || phi->color >= g_.n_colors) {
          throw std::invalid_argument("formula references an unknown color");
        }
        for (int v : g_.colors[phi->color]) r[v] = 1;
        break;
      }
      case Formula::Op::Not: {
        const auto& a = eval(phi->left);
        for (int v = 0; v < g_.n; ++v) r[v] = !a[v];
        break;
      }
      case Formula::Op::And: {
        const auto& a = eval(phi->left);
        const auto& b = eval(phi->right);
        for (int v = 0; v < g_.n; ++v) r[v] = a[v] && b[v];
        break;
      }
      case Formula::Op::Pres: {
        std::vector<Rational> sum(g_.n, Rational(0));
        for (const auto& term : phi->terms) {
          const auto& body = eval(term.body);
          for (int v = 0; v < g_.n; ++v) {
            long count = 0;
            switch (term.guard) {
              case Guard::Out:
                for (int u : out_adj_[v]) count += body[u];
                break;
              case Guard::In:
                for (int u : in_adj_[v]) count += body[u];
                break;
              case Guard::Top:
                for (int u = 0; u < g_.n; ++u) count += body[u];
                break;
            }
            sum[v] += term.lambda * count;
          }
        }
        for (int v = 0; v < g_.n; ++v) r[v] = compare(sum[v], phi->cmp, phi->delta);
        break;
      }
      case Formula::Op::TwoHop: {
        std::vector<Rational> sum(g_.n, Rational(0));
        for (const auto& term : phi->two_hop) {
          const auto& body = eval(term.body);
          // Per middle vertex z, the number of valid second hops.
          std::vector<long> second(g_.n, 0);
          for (int z = 0; z < g_.n; ++z) {
            const auto& hop2 = term.hop2_out ? out_adj_[z] : in_adj_[z];
            for (int y : hop2) second[z] += body[y];
          }
          for (int v = 0; v < g_.n; ++v) {
            long count = 0;
            const auto& hop1 = term.hop1_out ? out_adj_[v] : in_adj_[v];
            for (int z : hop1) count += second[z];
            sum[v] += term.lambda * count;
          }
        }
        for (const auto& term : phi->one_hop) {
          const auto& body = eval(term.body);
          for (int v = 0; v < g_.n; ++v) {
            long count = 0;
            const auto& adj = term.guard == Guard::Out ? out_adj_[v] : in_adj_[v];
            for (int u : adj) count += body[u];
            sum[v] += term.lambda * count;
          }
        }
        for (int v = 0; v < g_.n; ++v) r[v] = compare(sum[v], phi->cmp, phi->delta);
        break;
      }
    }
    return cache_.emplace(phi.get(), std::move(r)).first->second;
  }

 private:
  const Graph& g_;
  std::vector<std::vector<int>> out_adj_, in_adj_;
  std::map<const Formula*, std::vector<char>> cache_;
};

}  // namespace

std::vector<char> eval_all(const FormulaPtr& phi, const Graph& g) {
  Evaluator e(g);
  return e.eval(phi);
}

bool eval_formula(const FormulaPtr& phi, const Graph& g, int v) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("eval_formula: invalid vertex id");
  return eval_all(phi, g)[v] != 0;
}

int valuation(const FormulaPtr& phi, const Graph& g, int v) {
  return eval_formula(phi, g, v) ? 1 : 0;
}

namespace {

template <typename Fn>
FormulaPtr map_formula(const FormulaPtr& phi, std::map<const Formula*, FormulaPtr>& memo,
                       Fn&& fn) {
  auto it = memo.find(phi.get());
  if (it != memo.end()) return it->second;
  FormulaPtr result;
  switch (phi->op) {
    case Formula::Op::Top:
    case Formula::Op::Color:
      result = phi;
      break;
    case Formula::Op::Not:
      result = f_not(map_formula(phi->left, memo, fn));
      break;
    case Formula::Op::And:
      result = f_and(map_formula(phi->left, memo, fn), map_formula(phi->right, memo, fn));
      break;
    case Formula::Op::Pres:
    case Formula::Op::TwoHop: {
      Formula copy = *phi;
      for (auto& t : copy.terms) t.body = map_formula(t.body, memo, fn);
      for (auto& t : copy.two_hop) t.body = map_formula(t.body, memo, fn);
      for (auto& t : copy.one_hop) t.body = map_formula(t.body, memo, fn);
      result = fn(std::make_shared<const Formula>(std::move(copy)));
      break;
    }
  }
  memo.emplace(phi.get(), result);
  return result;
}

FormulaPtr scale_quantifier(const FormulaPtr& phi) {
  Integer d = phi->delta.get_den();
  for (const auto& t : phi->terms) d = lcm(d, t.lambda.get_den());
  for (const auto& t : phi->two_hop) d = lcm(d, t.lambda.get_den());
  for (const auto& t : phi->one_hop) d = lcm(d, t.lambda.get_den());
  if (d == 1) return phi;
  Formula copy = *phi;
  Rational f(d);
  for (auto& t : copy.terms) t.lambda *= f;
  for (auto& t : copy.two_hop) t.lambda *= f;
  for (auto& t : copy.one_hop) t.lambda *= f;
  copy.delta *= f;
  return std::make_shared<const Formula>(std::move(copy));
}

}  // namespace

FormulaPtr rationalize(const FormulaPtr& phi) {
  std::map<const Formula*, FormulaPtr> memo;
  return map_formula(phi, memo, scale_quantifier);
}

namespace {

FormulaPtr to_ge(const FormulaPtr& raw) {
  FormulaPtr phi = scale_quantifier(raw);
  auto with_cmp_delta = [&](Cmp cmp, Rational delta) {
    Formula copy = *phi;
    copy.cmp = cmp;
    copy.delta = std::move(delta);
    return std::make_shared<const Formula>(std::move(copy));
  };
  switch (phi->cmp) {
    case Cmp::Ge: return phi;
    case Cmp::Gt: return with_cmp_delta(Cmp::Ge, phi->delta + 1);
    case Cmp::Le: return f_not(with_cmp_delta(Cmp::Ge, phi->delta + 1));
    case Cmp::Lt: return f_not(with_cmp_delta(Cmp::Ge, phi->delta));
    case Cmp::Eq:
      return f_and(with_cmp_delta(Cmp::Ge, phi->delta),
                   f_not(with_cmp_delta(Cmp::Ge, phi->delta + 1)));
    case Cmp::Ne:
      return f_not(f_and(with_cmp_delta(Cmp::Ge, phi->delta),
                         f_not(with_cmp_delta(Cmp::Ge, phi->delta + 1))));
  }
  throw std::logic_error("bad comparison");
}

}  // namespace

FormulaPtr normalize_ge(const FormulaPtr& phi) {
  std::map<const Formula*, FormulaPtr> memo;
  return map_formula(phi, memo, to_ge);
}

namespace {

void scan_dialect(const FormulaPtr& phi, Dialect& d, std::map<const Formula*, bool>& seen) {
  if (seen.count(phi.get())) return;
  seen[phi.get()] = true;
  switch (phi->op) {
    case Formula::Op::Top:
    case Formula::Op::Color:
      break;
    case Formula::Op::Not:
      scan_dialect(phi->left, d, seen);
      break;
    case Formula::Op::And:
      scan_dialect(phi->left, d, seen);
      scan_dialect(phi->right, d, seen);
      break;
    case Formula::Op::Pres:
      for (const auto& t : phi->terms) {
        if (t.guard == Guard::Top) d.uses_top_guard = true;
        if (t.guard == Guard::In) d.uses_edge_in = true;
        scan_dialect(t.body, d, seen);
      }
      break;
    case Formula::Op::TwoHop:
      d.uses_two_hop = true;
      for (const auto& t : phi->two_hop) {
        if (!t.hop1_out || !t.hop2_out) d.uses_edge_in = true;
        scan_dialect(t.body, d, seen);
      }
      for (const auto& t : phi->one_hop) {
        if (t.guard == Guard::In) d.uses_edge_in = true;
        scan_dialect(t.body, d, seen);
      }
      break;
  }
}

}  // namespace

Dialect dialect_of(const FormulaPtr& phi) {
  Dialect d;
  std::map<const Formula*, bool> seen;
  scan_dialect(phi, d, seen);
  return d;
}

namespace {

const std::string& key_of(const FormulaPtr& phi, std::map<const Formula*, std::string>& memo) {
  auto it = memo.find(phi.get());
  if (it != memo.end()) return it->second;
  std::string s;
  auto guard_name = [](Guard g) {
    switch (g) {
      case Guard::Out: return "out";
      case Guard::In: return "in";
      case Guard::Top: return "top";
    }
    return "?";
  };
  auto cmp_name = [](Cmp c) {
    switch (c) {
      case Cmp::Ge: return ">=";
      case Cmp::Le: return "<=";
      case Cmp::Eq: return "=";
      case Cmp::Ne: return "!=";
      case Cmp::Gt: return ">";
      case Cmp::Lt: return "<";
    }
    return "?";
  };
  switch (phi->op) {
    case Formula::Op::Top:
      s = "top";
      break;
    case Formula::Op::Color:
      s = "(U " + std::to_string(phi->color + 1) + ")";
      break;
    case Formula::Op::Not:
      s = "(not " + key_of(phi->left, memo) + ")";
      break;
    case Formula::Op::And:
      s = "(and " + key_of(phi->left, memo) + " " + key_of(phi->right, memo) + ")";
      break;
    case Formula::Op::Pres: {
      s = "(pres (";
      for (const auto& t : phi->terms) {
        s += "(" + rational_to_string(t.lambda) + " " + guard_name(t.guard) + " " +
             key_of(t.body, memo) + ")";
      }
      s += ") \"" + std::string(cmp_name(phi->cmp)) + "\" " + rational_to_string(phi->delta) + ")";
      break;
    }
    case Formula::Op::TwoHop: {
      s = "(twohop (";
      for (const auto& t : phi->two_hop) {
        s += "(" + rational_to_string(t.lambda) + " " + (t.hop1_out ? "out" : "in") + " " +
             (t.hop2_out ? "out" : "in") + " " + key_of(t.body, memo) + ")";
      }
      s += ") (";
      for (const auto& t : phi->one_hop) {
        s += "(" + rational_to_string(t.lambda) + " " + guard_name(t.guard) + " " +
             key_of(t.body, memo) + ")";
      }
      s += ") \"" + std::string(cmp_name(phi->cmp)) + "\" " + rational_to_string(phi->delta) + ")";
      break;
    }
  }
  return memo.emplace(phi.get(), std::move(s)).first->second;
}

void collect_subformulas(const FormulaPtr& phi, std::map<std::string, bool>& seen,
                         std::map<const Formula*, std::string>& keys,
                         std::vector<FormulaPtr>& out) {
  const std::string& k = key_of(phi, keys);
  if (seen.count(k)) return;
  switch (phi->op) {
    case Formula::Op::Top:
    case Formula::Op::Color:
      break;
    case Formula::Op::Not:
      collect_subformulas(phi->left, seen, keys, out);
      break;
    case Formula::Op::And:
      collect_subformulas(phi->left, seen, keys, out);
      collect_subformulas(phi->right, seen, keys, out);
      break;
    case Formula::Op::Pres:
      for (const auto& t : phi->terms) collect_subformulas(t.body, seen, keys, out);
      break;
    case Formula::Op::TwoHop:
      for (const auto& t : phi->two_hop) collect_subformulas(t.body, seen, keys, out);
      for (const auto& t : phi->one_hop) collect_subformulas(t.body, seen, keys, out);
      break;
  }
  if (seen.emplace(k, true).second) out.push_back(phi);
}

}  // namespace

std::string formula_key(const FormulaPtr& phi) {
  std::map<const Formula*, std::string> memo;
  return key_of(phi, memo);
}

std::vector<FormulaPtr> subformula_index(const FormulaPtr& phi) {
  std::map<std::string, bool> seen;
  std::map<const Formula*, std::string> keys;
  std::vector<FormulaPtr> out;
  collect_subformulas(phi, seen, keys, out);
  return out;
}

int formula_size(const FormulaPtr& phi) {
  return (int)subformula_index(phi).size();
}

}  // namespace gnnv
