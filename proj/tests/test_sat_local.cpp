#include <doctest.h>

#include "gnnv/oracle.hpp"
#include "gnnv/sat_local.hpp"
#include "gnnv/translate.hpp"

using namespace gnnv;

namespace {

Graph five_vertex_fixture() {
  // 1 -> 2, 1 -> 3, 3 -> 2, 1 -> 4, 4 -> 1 (zero-based below).
  Graph g(1, 4);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(2, 1);
  g.add_edge(0, 3);
  g.add_edge(3, 0);
  return g;
}

}  // namespace

TEST_CASE("unravelling the fixture to depth 3") {
  Graph g = five_vertex_fixture();
  auto [tree, root] = unravel(g, 0, 3);
  CHECK(root == 0);
  // Proper paths may revisit vertices as long as no single edge is
  // immediately retraced; from vertex 0 that gives 4 length-1 paths,
  // 4 length-2 paths, and 8 length-3 paths.
  CHECK(tree.n == 17);
  tree.validate();
  // The tree is acyclic with every non-root vertex linked to its parent.
  CHECK(tree.edges.size() == 16);

  auto [shallow, r1] = unravel(g, 0, 1);
  CHECK(shallow.n == 5);
  auto [trivial, r0] = unravel(g, 0, 0);
  CHECK(trivial.n == 1);
}

TEST_CASE("unravelling preserves local histories") {
  Graph g = five_vertex_fixture();
  RandomSuite suite(8080);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 2;
  for (int v = 0; v < g.n; ++v) {
    GnnSpec gnn = suite.gnn(opt);
    CHECK(unravelling_preserves_history(gnn, g, v));
  }
  for (int trial = 0; trial < 30; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    Graph h = suite.graph(4, 1);
    CHECK(unravelling_preserves_history(gnn, h, (int)(suite.rng() % h.n)));
  }
}

TEST_CASE("characteristic systems accept the true child multiplicities") {
  RandomSuite suite(1717);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 2;
  opt.trrelu_only = true;
  for (int trial = 0; trial < 20; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    Graph g = suite.graph(3, 1);
    int ell = gnn.n_layers();
    int v = (int)(suite.rng() % g.n);

    // Collect distinct (ell-1)-histories of neighbors and count occurrences.
    std::vector<History> outs, ins;
    std::vector<Integer> counts_out, counts_in;
    auto tally = [&](std::vector<History>& hs, std::vector<Integer>& counts,
                     const History& h) {
      for (std::size_t i = 0; i < hs.size(); ++i) {
        if (hs[i] == h) {
          ++counts[i];
          return;
        }
      }
      hs.push_back(h);
      counts.push_back(1);
    };
    for (int u : g.out_neighbors(v)) tally(outs, counts_out, history(gnn, g, u, ell - 1));
    for (int u : g.in_neighbors(v)) tally(ins, counts_in, history(gnn, g, u, ell - 1));

    CharSystem sys =
        char_system(gnn, history(gnn, g, v, ell), 0, std::nullopt, outs, ins);
    CHECK(sys.n_vars() == (int)(outs.size() + ins.size()));

    std::vector<Integer> z = counts_out;
    z.insert(z.end(), counts_in.begin(), counts_in.end());
    for (const auto& row : sys.rows) {
      Integer lhs = row.constant;
      for (std::size_t i = 0; i < z.size(); ++i) lhs += row.coeffs[i] * z[i];
      switch (row.rel) {
        case LinRel::Ge: CHECK(lhs >= row.rhs); break;
        case LinRel::Le: CHECK(lhs <= row.rhs); break;
        case LinRel::Eq: CHECK(lhs == row.rhs); break;
      }
    }
    auto sol = ilp_feasible(sys);
    CHECK(sol.has_value());
  }
}

TEST_CASE("satisfiability decisions agree with brute-force search") {
  RandomSuite suite(2718);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 2;
  opt.trrelu_only = true;
  EnumConfig cfg;
  cfg.n_colors = 1;
  cfg.max_vertices = 3;
  int sat_seen = 0, unsat_seen = 0;
  for (int trial = 0; trial < 20; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    Verdict v = decide_sat(gnn);
    REQUIRE(v.kind != Verdict::Kind::ResourceLimit);
    auto brute = brute_sat(gnn, cfg);
    if (v.kind == Verdict::Kind::Sat) {
      ++sat_seen;
      REQUIRE(v.witness.has_value());
      CHECK(verify_witness(gnn, *v.witness));
      CHECK(accepts(gnn, v.witness->tree, v.witness->root));
    } else {
      ++unsat_seen;
      CHECK(!brute.found);  // no small model may exist for an unsat network
    }
    if (brute.found) CHECK(v.kind == Verdict::Kind::Sat);
  }
  CHECK(sat_seen > 0);
  CHECK(unsat_seen > 0);
}

namespace {

// Flat below 1, x-1 on [1,2), flat 1 from 2 on: eventually constant but not
// the truncated ReLU, with integer breakpoints so its spectra stay small.
Activation shifted_clamp() {
  Activation a;
  a.pieces.push_back({Rational(1), Rational(0), Rational(0)});
  a.pieces.push_back({Rational(2), Rational(1), Rational(-1)});
  a.pieces.push_back({std::nullopt, Rational(0), Rational(1)});
  a.validate();
  return a;
}

GnnSpec one_layer_counter(const Rational& a_out) {
  GnnSpec g;
  g.n_colors = 1;
  Layer l;
  l.dim = 1;
  l.act = shifted_clamp();
  l.C = {{Rational(0)}};
  l.A_out = {{a_out}};
  l.A_in = {{Rational(0)}};
  l.R = {{Rational(0)}};
  l.b = {Rational(0)};
  g.layers.push_back(l);
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("eventually-constant engine agrees with brute-force search") {
  // Accepts iff the vertex has at least 2 out-neighbors of color 0.
  GnnSpec sat_gnn = one_layer_counter(Rational(1));
  // The aggregate never reaches the activation's rising piece.
  GnnSpec unsat_gnn = one_layer_counter(Rational(0));

  EnumConfig cfg;
  cfg.n_colors = 1;
  cfg.max_vertices = 3;
  for (const GnnSpec* gnn : {&sat_gnn, &unsat_gnn}) {
    CHECK(!gnn->all_trrelu());
    Verdict v = decide_sat_eventually_constant(*gnn);
    REQUIRE(v.kind != Verdict::Kind::ResourceLimit);
    auto brute = brute_sat(*gnn, cfg);
    if (v.kind == Verdict::Kind::Sat) {
      REQUIRE(v.witness.has_value());
      CHECK(accepts(*gnn, v.witness->tree, v.witness->root));
    } else {
      CHECK(!brute.found);
    }
    if (brute.found) CHECK(v.kind == Verdict::Kind::Sat);
  }
  CHECK(decide_sat_eventually_constant(sat_gnn).kind == Verdict::Kind::Sat);
  CHECK(decide_sat_eventually_constant(unsat_gnn).kind == Verdict::Kind::Unsat);
}

TEST_CASE("witness minimization respects the degree bounds") {
  RandomSuite suite(1618);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 2;
  opt.trrelu_only = true;
  int minimized = 0;
  for (int trial = 0; trial < 30 && minimized < 5; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    Verdict v = decide_sat(gnn);
    if (v.kind != Verdict::Kind::Sat) continue;
    ++minimized;
    auto bounds = small_solution_bounds(gnn);
    TreeWitness small = minimize_witness(gnn, *v.witness);
    CHECK(accepts(gnn, small.tree, small.root));
    for (int u = 0; u < small.tree.n; ++u) {
      Integer deg = (long)(small.tree.out_neighbors(u).size() +
                           small.tree.in_neighbors(u).size());
      CHECK(deg <= bounds.alpha * bounds.beta * 4);
    }
  }
  CHECK(minimized > 0);
}

TEST_CASE("bounded universal satisfiability") {
  // "some out-neighbor": holds at every vertex of a directed cycle.
  auto phi = f_pres({{1, Guard::Out, f_top()}}, Cmp::Ge, 1);
  auto res = decide_universal_bounded(SpecOrFormula{phi}, 3, false);
  REQUIRE(res.found);
  auto acc = eval_all(phi, res.graph);
  for (int v = 0; v < res.graph.n; ++v) CHECK(acc[v]);

  // "no vertex anywhere": never universally satisfiable.
  auto res2 = decide_universal_bounded(SpecOrFormula{f_bot()}, 3, false);
  CHECK(!res2.found);
}
