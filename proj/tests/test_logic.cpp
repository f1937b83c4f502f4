#include <doctest.h>

#include "gnnv/logic.hpp"
#include "gnnv/oracle.hpp"
#include "gnnv/sexpr.hpp"

using namespace gnnv;

namespace {

Graph path_fixture() {
  // 0 -> 1 -> 2, vertex 0 and 2 colored 0, vertex 1 colored 1.
  Graph g(2, 3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.colors[0] = {0, 2};
  g.colors[1] = {1};
  return g;
}

}  // namespace

TEST_CASE("basic evaluation") {
  Graph g = path_fixture();
  CHECK(eval_formula(f_top(), g, 0));
  CHECK(!eval_formula(f_bot(), g, 0));
  CHECK(eval_formula(f_color(1), g, 1));
  CHECK(!eval_formula(f_color(1), g, 0));
  CHECK(eval_formula(f_and(f_color(0), f_not(f_color(1))), g, 2));
  CHECK(eval_formula(f_or(f_color(1), f_color(0)), g, 1));
  CHECK(eval_formula(f_implies(f_bot(), f_color(1)), g, 0));

  // "has at least one out-neighbor of color 1"
  auto some_out = f_pres({{1, Guard::Out, f_color(1)}}, Cmp::Ge, 1);
  CHECK(eval_formula(some_out, g, 0));
  CHECK(!eval_formula(some_out, g, 1));
  // "number of in-neighbors differs from 1"
  auto in_ne = f_pres({{1, Guard::In, f_top()}}, Cmp::Ne, 1);
  CHECK(eval_formula(in_ne, g, 0));
  CHECK(!eval_formula(in_ne, g, 2));
  // global count of color-0 vertices
  auto glob = f_pres({{Rational(1, 2), Guard::Top, f_color(0)}}, Cmp::Eq, 1);
  CHECK(eval_formula(glob, g, 1));

  // ordered two-hop pairs from vertex 0: (1, 2) only
  auto pairs = f_twohop({{1, true, true, f_top()}}, {}, Cmp::Eq, 1);
  CHECK(eval_formula(pairs, g, 0));
  CHECK(!eval_formula(pairs, g, 1));

  auto acc = eval_all(some_out, g);
  for (int v = 0; v < g.n; ++v) CHECK((bool)acc[v] == eval_formula(some_out, g, v));
}

TEST_CASE("valuation counts satisfied vertices of the body") {
  Graph g = path_fixture();
  auto phi = f_pres({{1, Guard::Top, f_color(0)}}, Cmp::Ge, 0);
  CHECK(valuation(f_color(0), g, 0) == 1);
  CHECK(valuation(f_color(0), g, 1) == 0);
  CHECK(eval_formula(phi, g, 0));
}

TEST_CASE("dialect detection") {
  auto local_out = f_pres({{1, Guard::Out, f_top()}}, Cmp::Ge, 1);
  CHECK(dialect_of(local_out).local());
  CHECK(dialect_of(local_out).outgoing_only());
  auto with_in = f_pres({{1, Guard::In, f_top()}}, Cmp::Ge, 1);
  CHECK(!dialect_of(with_in).outgoing_only());
  auto with_top = f_pres({{1, Guard::Top, f_top()}}, Cmp::Ge, 1);
  CHECK(!dialect_of(with_top).local());
  auto two = f_twohop({{1, true, true, f_top()}}, {}, Cmp::Ge, 1);
  CHECK(dialect_of(two).uses_two_hop);
}

TEST_CASE("normalization preserves meaning") {
  RandomSuite suite(4242);
  RandomFormulaOptions opt;
  opt.max_depth = 2;
  opt.n_colors = 2;
  opt.local = false;
  for (int trial = 0; trial < 60; ++trial) {
    auto phi = suite.formula(opt);
    auto norm = normalize_ge(phi);
    auto rat = rationalize(phi);
    Graph g = suite.graph(4, opt.n_colors);
    for (int v = 0; v < g.n; ++v) {
      bool expect = eval_formula(phi, g, v);
      CHECK(eval_formula(norm, g, v) == expect);
      CHECK(eval_formula(rat, g, v) == expect);
    }
  }
}

TEST_CASE("normalized formulas only use >= quantifiers") {
  auto phi = f_pres({{Rational(1, 3), Guard::Out, f_color(0)}}, Cmp::Lt, Rational(2, 3));
  auto norm = normalize_ge(phi);
  for (const auto& sub : subformula_index(norm)) {
    if (sub->op == Formula::Op::Pres || sub->op == Formula::Op::TwoHop) {
      CHECK(sub->cmp == Cmp::Ge);
      CHECK(sub->delta.get_den() == 1);
    }
  }
}

TEST_CASE("structural keys and subformula order") {
  auto phi = f_and(f_color(0), f_pres({{1, Guard::Out, f_color(0)}}, Cmp::Ge, 1));
  auto same = f_and(f_color(0), f_pres({{1, Guard::Out, f_color(0)}}, Cmp::Ge, 1));
  CHECK(formula_key(phi) == formula_key(same));
  CHECK(formula_key(phi) != formula_key(f_color(0)));
  CHECK(formula_size(phi) == 3);  // the color atom is shared with the pres body

  auto idx = subformula_index(phi);
  CHECK(idx.back() == phi);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      CHECK(formula_key(idx[i]) != formula_key(idx[j]));
    }
  }
}

TEST_CASE("textual syntax round-trips") {
  RandomSuite suite(5150);
  RandomFormulaOptions opt;
  opt.max_depth = 3;
  opt.n_colors = 2;
  opt.local = false;
  for (int trial = 0; trial < 40; ++trial) {
    auto phi = suite.formula(opt);
    auto back = parse_formula_sexpr(formula_to_sexpr(phi));
    CHECK(formula_key(back) == formula_key(phi));
  }
  auto parsed = parse_formula_sexpr("(pres ((1 out top) (-1/2 in (U 1))) \">=\" 2)");
  CHECK(parsed->op == Formula::Op::Pres);
  CHECK(parsed->terms.size() == 2);
  CHECK(parsed->terms[1].lambda == Rational(-1, 2));
  CHECK(parsed->terms[1].body->op == Formula::Op::Color);
  CHECK_THROWS(parse_formula_sexpr("(pres"));
}
