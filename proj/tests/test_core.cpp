#include <doctest.h>

#include <stdexcept>

#include "gnnv/activation.hpp"
#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/oracle.hpp"
#include "gnnv/rational.hpp"

using namespace gnnv;

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-2/6") == Rational(-1, 3));
  CHECK(parse_rational("5") == 5);
  CHECK(parse_rational("7/1") == 7);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);

  CHECK(rational_to_string(Rational(3, 4)) == "3/4");
  CHECK(rational_to_string(parse_rational("-6/4")) == "-3/2");
  CHECK(rational_to_string(parse_rational("8/2")) == "4");
  for (const char* s : {"3/4", "-3/2", "0", "17"}) {
    CHECK(rational_to_string(parse_rational(s)) == s);
  }
}

TEST_CASE("rational helpers") {
  CHECK(lcm(4, 6) == 12);
  CHECK(common_denominator({Rational(1, 2), Rational(1, 3), 1}) == 6);
  CHECK(common_denominator({}) == 1);
  CHECK(dot({1, Rational(1, 2)}, {2, 4}) == 4);
  CHECK(floor_div(-7, 2) == -4);
  CHECK(ceil_div(-7, 2) == -3);
  CHECK(rational_floor(Rational(-1, 2)) == -1);
  CHECK(rational_ceil(Rational(-1, 2)) == 0);
}

TEST_CASE("graph validation and symmetric closure") {
  Graph g(2, 3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.colors[0].insert(0);
  g.colors[1].insert(2);
  g.validate();
  CHECK(g.out_neighbors(1) == std::vector<int>{2});
  CHECK(g.in_neighbors(1) == std::vector<int>{0});

  Graph bad = g;
  bad.edges.insert({2, 3});
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  Graph asym = g;
  asym.undirected = true;
  CHECK_THROWS_AS(asym.validate(), std::invalid_argument);

  Graph sym = symmetric_closure(g);
  sym.validate();
  CHECK(sym.undirected);
  CHECK(sym.has_edge(1, 0));
  CHECK(sym.has_edge(2, 1));

  Graph u = disjoint_union(g, g);
  u.validate();
  CHECK(u.n == 6);
  CHECK(u.has_edge(3, 4));
  CHECK(u.colors[1].count(5) == 1);
}

TEST_CASE("activations") {
  Activation t = Activation::trrelu();
  t.validate();
  CHECK(t.is_trrelu());
  CHECK(t.apply(Rational(-1, 2)) == 0);
  CHECK(t.apply(0) == 0);  // breakpoints belong to the piece on their right
  CHECK(t.apply(Rational(1, 3)) == Rational(1, 3));
  CHECK(t.apply(1) == 1);
  CHECK(t.apply(7) == 1);
  CHECK(t.eventually_constant());
  CHECK(t.left_threshold() == 0);
  CHECK(t.right_threshold() == 1);

  Activation r = Activation::relu();
  CHECK(!r.eventually_constant());
  CHECK(r.apply(-3) == 0);
  CHECK(r.apply(Rational(5, 2)) == Rational(5, 2));

  Activation clip;  // 0 below 1/2, then slope 2, capped at 3 from x = 2 on
  clip.pieces = {{Rational(1, 2), 0, 0}, {2, 2, -1}, {std::nullopt, 0, 3}};
  clip.validate();
  CHECK(clip.eventually_constant());
  CHECK(clip.apply(Rational(1, 2)) == 0);
  CHECK(clip.apply(1) == 1);
  CHECK(clip.apply(2) == 3);
  CHECK(clip.coefficient_denominator() == 2);

  Activation unordered;
  unordered.pieces = {{1, 0, 0}, {0, 1, 0}, {std::nullopt, 0, 1}};
  CHECK_THROWS(unordered.validate());
}

TEST_CASE("forward pass on a small fixture") {
  // One layer summing out-neighbor indicators of color 0, untruncated.
  GnnSpec gnn;
  gnn.n_colors = 1;
  Layer l;
  l.dim = 1;
  l.act = Activation::identity();
  l.C = {{0}};
  l.A_out = {{1}};
  l.A_in = {{0}};
  l.R = {{0}};
  l.b = {0};
  gnn.layers = {l};
  gnn.validate();
  CHECK(gnn.local());
  CHECK(gnn.outgoing_only());
  CHECK(!gnn.all_trrelu());

  Graph g(1, 3);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.colors[0] = {1, 2};
  auto feat = forward(gnn, g);
  CHECK(feat[0][1] == Vec{1});  // layer 0 is the color indicator
  CHECK(feat[1][0] == Vec{2});
  CHECK(feat[1][1] == Vec{0});
  CHECK(accepts(gnn, g, 0));
  CHECK(!accepts(gnn, g, 1));
  CHECK(accepts_feature({Rational(1, 2)}));
  CHECK(!accepts_feature({Rational(49, 100)}));
}

TEST_CASE("history recomputation agrees with direct histories") {
  RandomSuite suite(911);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.local = false;  // exercise the readout term too
  for (int trial = 0; trial < 25; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    Graph g = suite.graph(4, opt.n_colors);
    int ell = gnn.n_layers();
    auto feat = forward(gnn, g);
    std::vector<History> all;
    for (int u = 0; u < g.n; ++u) all.push_back(history_from_table(feat, u, ell - 1));
    for (int v = 0; v < g.n; ++v) {
      std::vector<History> outs, ins;
      for (int u : g.out_neighbors(v)) outs.push_back(all[u]);
      for (int u : g.in_neighbors(v)) ins.push_back(all[u]);
      History expect = history(gnn, g, v, ell);
      CHECK(expect == history_from_table(feat, v, ell));
      History got = history_step(gnn, feat[0][v], history_sum(outs, gnn, ell - 1),
                                 history_sum(ins, gnn, ell - 1),
                                 history_sum(all, gnn, ell - 1), ell);
      CHECK(got == expect);
    }
  }
}
