#include <doctest.h>

#include "gnnv/epa.hpp"
#include "gnnv/oracle.hpp"

using namespace gnnv;

TEST_CASE("construction helpers and structure") {
  auto phi = e_and(e_eq({{"x", 1}}, 4), e_star(e_eq({{"x", 1}}, 2)));
  CHECK(star_height(phi) == 1);
  CHECK(star_height(e_eq({{"x", 1}}, 4)) == 0);
  CHECK(star_height(e_star(e_star(e_true()))) == 2);
  CHECK(free_vars(phi) == std::set<std::string>{"x"});
  CHECK(free_vars(e_exists({"x"}, phi)).empty());
}

TEST_CASE("witness search fixtures") {
  // x = 4 as a sum of blocks of exactly 2 gives summands [2, 2].
  auto phi = e_and(e_eq({{"x", 1}}, 4), e_star(e_eq({{"x", 1}}, 2)));
  auto res = sat_epa_bounded(phi, {3, 4, 1'000'000});
  REQUIRE(res.sat);
  CHECK(res.assignment.at("x") == 4);
  CHECK(verify_epa_witness(phi, res.assignment, res.witness));

  // x = 0 is covered by the empty sum.
  auto zero = e_and(e_eq({{"x", 1}}, 0), e_star(e_eq({{"x", 1}}, 2)));
  auto rz = sat_epa_bounded(zero, {3, 4, 1'000'000});
  REQUIRE(rz.sat);
  CHECK(rz.assignment.at("x") == 0);

  // x = 3 cannot be decomposed into blocks of 2.
  auto odd = e_and(e_eq({{"x", 1}}, 3), e_star(e_eq({{"x", 1}}, 2)));
  CHECK(!sat_epa_bounded(odd, {4, 4, 1'000'000}).sat);

  // Existential quantification and disjunction.
  auto ex = e_exists({"y"}, e_and(e_eq({{"x", 1}, {"y", -2}}, 0), e_ge({{"y", 1}}, 1)));
  auto rex = sat_epa_bounded(ex, {3, 3, 1'000'000});
  REQUIRE(rex.sat);
  CHECK(rex.assignment.at("x") % 2 == 0);
  CHECK(rex.assignment.at("x") >= 2);

  auto disj = e_or(e_eq({{"x", 1}}, -5), e_eq({{"x", 1}}, 2));
  auto rd = sat_epa_bounded(disj, {3, 3, 1'000'000});
  REQUIRE(rd.sat);
  CHECK(rd.assignment.at("x") == 2);
}

TEST_CASE("witness verification rejects bad certificates") {
  auto phi = e_star(e_eq({{"x", 1}}, 2));
  auto res = sat_epa_bounded(e_and(e_eq({{"x", 1}}, 4), phi), {3, 4, 1'000'000});
  REQUIRE(res.sat);
  EpaAssignment wrong = {{"x", 5}};
  CHECK(!verify_epa_witness(e_and(e_eq({{"x", 1}}, 4), phi), wrong, res.witness));
}

TEST_CASE("activation graphs as formulas") {
  auto f = characteristic_formula(Activation::trrelu(), 2, "x", "y");
  // Scaled by 2: input 1 means 1/2, so y should be 1; input 3 clamps to 2;
  // input -1 clamps to 0.
  auto holds = [&](long x, long y) {
    EpaAssignment sigma = {{"x", x}, {"y", y}};
    return check_epa(f, sigma, {3, 8, 1'000'000}).has_value();
  };
  CHECK(holds(1, 1));
  CHECK(holds(3, 2));
  CHECK(holds(-1, 0));
  CHECK(holds(0, 0));
  CHECK(holds(2, 2));
  CHECK(!holds(1, 2));
  CHECK(!holds(3, 3));
  CHECK(!holds(-1, 1));
}

TEST_CASE("normal form") {
  auto nf = e_exists({"y"}, e_and(e_ge({{"y", 1}}, 0), e_star(e_eq({{"x", 1}}, 1))));
  CHECK(epa_in_normal_form(nf));
  CHECK(epa_in_normal_form(e_ge({{"x", 1}}, 0)));

  auto messy = e_or(e_and(e_star(e_eq({{"x", 1}}, 2)), e_eq({{"x", 1}}, 4)),
                    e_exists({"z"}, e_ge({{"z", 1}}, 3)));
  auto norm = to_normal_form(messy);
  CHECK(epa_in_normal_form(norm));
  // Meaning is preserved at sample points.
  for (long x : {0L, 2L, 3L, 4L}) {
    EpaAssignment sigma = {{"x", x}};
    bool a = check_epa(messy, sigma, {4, 6, 1'000'000}).has_value();
    bool b = check_epa(norm, sigma, {4, 6, 1'000'000}).has_value();
    CHECK(a == b);
  }
}

namespace {

GnnSpec outdegree_at_least(int k) {
  // Two clamped layers accepting exactly the vertices with >= k out-neighbors.
  Activation clip02;
  clip02.pieces = {{0, 0, 0}, {2, 1, 0}, {std::nullopt, 0, 2}};
  GnnSpec gnn;
  gnn.n_colors = 1;
  Layer l1;
  l1.dim = 1;
  l1.act = clip02;
  l1.C = {{0}};
  l1.A_out = {{0}};
  l1.A_in = {{0}};
  l1.R = {{0}};
  l1.b = {1};
  Layer l2;
  l2.dim = 1;
  l2.act = clip02;
  l2.C = {{0}};
  l2.A_out = {{1}};
  l2.A_in = {{0}};
  l2.R = {{0}};
  l2.b = {Rational(1, 2) - k};
  gnn.layers = {l1, l2};
  return gnn;
}

}  // namespace

TEST_CASE("history-space formulas describe realizable histories") {
  RandomSuite suite(9090);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 2;
  opt.outgoing_only = true;
  opt.trrelu_only = true;
  for (int trial = 0; trial < 10; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    auto hsf = history_space_formula(gnn);
    CHECK(star_height(hsf.phi) == gnn.n_layers());
    Graph g = suite.graph(3, 1);
    for (int v = 0; v < g.n; ++v) {
      auto [sigma, w] = history_space_witness(hsf, gnn, g, v);
      CHECK(verify_epa_witness(hsf.phi, sigma, w));
    }
  }
}

TEST_CASE("bounded satisfiability for one-directional networks") {
  // Needs a colored out-neighbor: satisfiable, witness is a small tree.
  GnnSpec needs_child;
  needs_child.n_colors = 1;
  Layer l;
  l.dim = 1;
  l.act = Activation::trrelu();
  l.C = {{0}};
  l.A_out = {{1}};
  l.A_in = {{0}};
  l.R = {{0}};
  l.b = {0};
  needs_child.layers = {l};
  auto res = decide_sat_ol(needs_child, {3, 3, 2'000'000});
  REQUIRE(res.sat);
  REQUIRE(res.witness.has_value());
  CHECK(accepts(needs_child, res.witness->tree, res.witness->root));

  // Constantly zero: no witness at any bounds.
  GnnSpec never = needs_child;
  never.layers[0].A_out = {{0}};
  CHECK(!decide_sat_ol(never, {3, 3, 500'000}).sat);

  // Out-degree >= 3 via a [0, 2] clamp: forces multiplicity greater than one.
  GnnSpec deg3 = outdegree_at_least(3);
  auto r3 = decide_sat_ol(deg3, {4, 8, 400'000'000});
  REQUIRE(r3.sat);
  REQUIRE(r3.witness.has_value());
  CHECK(accepts(deg3, r3.witness->tree, r3.witness->root));
  CHECK(r3.witness->tree.out_neighbors(r3.witness->root).size() >= 3);
}
