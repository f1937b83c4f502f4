#include <doctest.h>

#include "gnnv/logic.hpp"
#include "gnnv/oracle.hpp"

using namespace gnnv;

TEST_CASE("enumeration counts") {
  // Directed, c colors: sum over n of 2^(n^2 + c*n).
  EnumConfig d1{1, 1, false};
  CHECK(enumeration_count(d1) == 4);  // 2^(1+1)
  EnumConfig d2{1, 2, false};
  CHECK(enumeration_count(d2) == 4 + 64);  // + 2^(4+2)
  EnumConfig u2{2, 2, true};
  // Undirected: n(n+1)/2 edge slots; 2^(1+2) + 2^(3+4).
  CHECK(enumeration_count(u2) == 8 + 128);

  for (const EnumConfig& cfg : {d1, d2, u2}) {
    Integer seen = 0;
    enumerate_graphs(cfg, [&](const Graph& g) {
      g.validate();
      CHECK(g.n_colors == cfg.n_colors);
      CHECK(g.undirected == cfg.undirected);
      ++seen;
      return true;
    });
    CHECK(seen == enumeration_count(cfg));
  }
}

TEST_CASE("enumeration stops early") {
  EnumConfig cfg{1, 2, false};
  int calls = 0;
  enumerate_graphs(cfg, [&](const Graph&) { return ++calls < 10; });
  CHECK(calls == 10);
}

TEST_CASE("brute-force search finds the expected models") {
  auto phi = f_pres({{1, Guard::Out, f_top()}}, Cmp::Ge, 2);
  EnumConfig cfg{1, 3, false};
  auto res = brute_sat(phi, cfg);
  REQUIRE(res.found);
  CHECK(eval_formula(phi, res.graph, res.vertex));
  CHECK(res.graph.out_neighbors(res.vertex).size() >= 2);

  CHECK(!brute_sat(f_bot(), cfg).found);
  CHECK(brute_universal_sat(f_top(), cfg).found);
  CHECK(!brute_universal_sat(phi, EnumConfig{1, 1, false}).found);
}

TEST_CASE("equivalence checking reports disagreements") {
  auto a = f_pres({{1, Guard::Out, f_top()}}, Cmp::Ge, 1);
  EnumConfig cfg{1, 2, false};
  CHECK(equivalence_check(a, a, cfg).equivalent);
  auto res = equivalence_check(SpecOrFormula{a}, SpecOrFormula{f_top()}, cfg);
  CHECK(!res.equivalent);
  CHECK(eval_formula(a, res.graph, res.vertex) !=
        eval_formula(f_top(), res.graph, res.vertex));
}

TEST_CASE("seeded generators are deterministic and respect their options") {
  RandomSuite a(123), b(123), c(124);
  RandomGnnOptions gopt;
  gopt.max_layers = 3;
  gopt.max_dim = 3;
  gopt.max_denominator = 4;
  CHECK(formula_key(a.formula({})) == formula_key(b.formula({})));
  Graph ga = a.graph(4, 2), gb = b.graph(4, 2);
  CHECK(ga.n == gb.n);
  CHECK(ga.edges == gb.edges);
  CHECK(ga.colors == gb.colors);
  GnnSpec na = a.gnn(gopt), nb = b.gnn(gopt);
  CHECK(na.n_layers() == nb.n_layers());
  auto stream_key = [](unsigned long seed) {
    RandomSuite s(seed);
    std::string k;
    for (int i = 0; i < 8; ++i) k += formula_key(s.formula({})) + ";";
    return k;
  };
  CHECK(stream_key(124) != stream_key(123));

  RandomSuite suite(55);
  for (int trial = 0; trial < 40; ++trial) {
    RandomGnnOptions opt;
    opt.max_layers = 2;
    opt.max_dim = 2;
    opt.local = (trial % 2 == 0);
    opt.outgoing_only = (trial % 3 == 0);
    opt.trrelu_only = (trial % 4 == 0);
    GnnSpec gnn = suite.gnn(opt);
    gnn.validate();
    CHECK(gnn.n_layers() <= opt.max_layers);
    if (opt.local) CHECK(gnn.local());
    if (opt.outgoing_only) CHECK(gnn.outgoing_only());
    if (opt.trrelu_only) CHECK(gnn.all_trrelu());
    for (const auto& l : gnn.layers) {
      CHECK(l.dim <= opt.max_dim);
      l.act.validate();
      CHECK(l.act.eventually_constant());
    }

    RandomFormulaOptions fopt;
    fopt.max_depth = 2;
    fopt.local = opt.local;
    fopt.outgoing_only = opt.outgoing_only;
    auto phi = suite.formula(fopt);
    auto dia = dialect_of(phi);
    if (fopt.local) CHECK(dia.local());
    if (fopt.outgoing_only) CHECK(dia.outgoing_only());

    Graph g = suite.graph(4, 1);
    g.validate();
    CHECK(g.n <= 4);
  }
}
