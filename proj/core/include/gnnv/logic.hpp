#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gnnv/graph.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

enum class Guard { Out, In, Top };
enum class Cmp { Ge, Le, Eq, Ne, Gt, Lt };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// One counting term of a Presburger quantifier: lambda * #y[guard(x,y) & body(y)].
struct PresTerm {
  Rational lambda;
  Guard guard = Guard::Out;
  FormulaPtr body;
};

// One two-hop counting term: lambda * #(z,y)[hop1(x,z) & hop2(z,y) & body(y)],
// counting ordered pairs. hop*_out selects the edge orientation of each hop.
struct TwoHopTerm {
  Rational lambda;
  bool hop1_out = true;
  bool hop2_out = true;
  FormulaPtr body;
};

// Modal formulas with one free variable. Or/implication are desugared to
// Not/And at construction time; the AST keeps only the primitives.
struct Formula {
  enum class Op { Top, Color, Not, And, Pres, TwoHop };
  Op op = Op::Top;

  int color = 0;           // Color: zero-based color index
  FormulaPtr left, right;  // Not uses left only

  std::vector<PresTerm> terms;      // Pres
  std::vector<TwoHopTerm> two_hop;  // TwoHop
  std::vector<PresTerm> one_hop;    // TwoHop: extra one-hop terms, guard Out/In
  Cmp cmp = Cmp::Ge;
  Rational delta;
};

FormulaPtr f_top();
FormulaPtr f_bot();
FormulaPtr f_color(int c);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_and(std::vector<FormulaPtr> parts);  // empty -> top
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(std::vector<FormulaPtr> parts);  // empty -> bot
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_pres(std::vector<PresTerm> terms, Cmp cmp, Rational delta);
FormulaPtr f_twohop(std::vector<TwoHopTerm> two_hop, std::vector<PresTerm> one_hop,
                    Cmp cmp, Rational delta);

// Merges a two-sided comparison  l0 + sum(lhs)  cmp  r0 + sum(rhs)  into a
// single-sided Pres node (terms moved left, constants into delta).
FormulaPtr pres_two_sided(Rational l0, std::vector<PresTerm> lhs, Cmp cmp,
                          Rational r0, std::vector<PresTerm> rhs);

bool eval_formula(const FormulaPtr& phi, const Graph& g, int v);
int valuation(const FormulaPtr& phi, const Graph& g, int v);

// Evaluates at every vertex at once (bodies shared across vertices).
std::vector<char> eval_all(const FormulaPtr& phi, const Graph& g);

// Clears rational coefficients: every Pres/TwoHop node is multiplied through
// by the least common denominator of its lambdas and delta.
FormulaPtr rationalize(const FormulaPtr& phi);

// Equivalent formula in which every quantifier uses >=. Implies rationalize.
FormulaPtr normalize_ge(const FormulaPtr& phi);

struct Dialect {
  bool uses_top_guard = false;
  bool uses_edge_in = false;
  bool uses_two_hop = false;

  bool local() const { return !uses_top_guard; }
  bool outgoing_only() const { return !uses_edge_in; }
};

Dialect dialect_of(const FormulaPtr& phi);

// Number of distinct subformulas (structural identity).
int formula_size(const FormulaPtr& phi);

// Canonical textual form; used for structural comparison and dedup.
std::string formula_key(const FormulaPtr& phi);

// Subformulas of phi, deduplicated structurally, ordered so that every
// strict subformula precedes the formulas containing it; the root is last.
std::vector<FormulaPtr> subformula_index(const FormulaPtr& phi);

}  // namespace gnnv
