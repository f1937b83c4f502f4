#include <doctest.h>

#include <random>

#include "gnnv/epa.hpp"
#include "gnnv/oracle.hpp"
#include "gnnv/reductions.hpp"
#include "gnnv/sat_local.hpp"
#include "gnnv/translate.hpp"

using namespace gnnv;

namespace {

// Applies aggregation-free layers to a single feature vector.
Vec apply_layers(const std::vector<Layer>& layers, Vec v) {
  for (const auto& l : layers) {
    Vec next = zero_vec(l.dim);
    for (int i = 0; i < l.dim; ++i) {
      Rational x = dot(l.C[i], v) + l.b[i];
      next[i] = l.act.apply(x);
    }
    v = std::move(next);
  }
  return v;
}

QfPresPtr random_qf(std::mt19937_64& rng, int depth, int n_vars) {
  long pick = (depth <= 0) ? 0 : (long)(rng() % 4);
  switch (pick) {
    case 1:
      return q_not(random_qf(rng, depth - 1, n_vars));
    case 2:
      return q_and({random_qf(rng, depth - 1, n_vars), random_qf(rng, depth - 1, n_vars)});
    case 3:
      return q_or({random_qf(rng, depth - 1, n_vars), random_qf(rng, depth - 1, n_vars)});
    default: {
      std::vector<Integer> coeffs(n_vars);
      for (auto& c : coeffs) c = (long)(rng() % 5) - 2;
      return q_atom(std::move(coeffs), (long)(rng() % 7) - 3);
    }
  }
}

}  // namespace

TEST_CASE("linear inequality test layers agree with direct evaluation") {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 200; ++trial) {
    int n_vars = 3;
    auto phi = random_qf(rng, 3, n_vars);
    auto layers = presburger_test_layers(phi, n_vars);
    CHECK((int)layers.size() == 2 * qf_depth(phi));
    Vec input = zero_vec(n_vars);
    for (auto& x : input) x = (long)(rng() % 4);
    Vec out = apply_layers(layers, input);
    // The prefix passes through unchanged and the result slot is 0/1.
    for (int i = 0; i < n_vars; ++i) CHECK(out[i] == input[i]);
    CHECK(out[n_vars] == (qf_eval(phi, input) ? 1 : 0));
  }
}

TEST_CASE("dimacs parsing") {
  Cnf3 cnf = parse_dimacs("c comment\np cnf 3 2\n1 -2 3 0\n-1 2 0\n");
  CHECK(cnf.n_vars == 3);
  REQUIRE(cnf.clauses.size() == 2);
  CHECK(cnf.clauses[0] == std::array<int, 3>{1, -2, 3});
  CHECK(cnf.clauses[1] == std::array<int, 3>{-1, 2, 2});  // short clause padded
  CHECK_THROWS(parse_dimacs("1 2 3 0\n"));
  CHECK_THROWS(parse_dimacs("p cnf 2 1\n1 2\n"));
}

TEST_CASE("3-CNF reduction matches truth-table satisfiability") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    Cnf3 cnf;
    cnf.n_vars = 1 + (int)(rng() % 3);
    int m = 1 + (int)(rng() % 3);
    for (int t = 0; t < m; ++t) {
      std::array<int, 3> cl;
      for (auto& lit : cl) {
        int v = 1 + (int)(rng() % cnf.n_vars);
        lit = (rng() % 2) ? v : -v;
      }
      cnf.clauses.push_back(cl);
    }
    auto sol = threesat_solve(cnf);
    GnnSpec gnn = threesat_to_gnn(cnf);
    CHECK(gnn.local());
    CHECK(gnn.all_trrelu());
    Verdict v = decide_sat(gnn);
    if (sol) {
      CHECK(v.kind == Verdict::Kind::Sat);
      Graph w = threesat_witness_graph(cnf, *sol);
      CHECK(accepts(gnn, w, 0));
    } else {
      CHECK(v.kind == Verdict::Kind::Unsat);
    }
  }
}

TEST_CASE("description logic fixtures") {
  // A and not A; exists R.A; exists R.A and forall R.not A.
  auto A = a_atom(0);
  auto contradiction = a_and(A, a_not(A));
  auto some = a_exists(A);
  auto clash = a_and(a_exists(A), a_forall(a_not(A)));

  for (bool undirected : {false, true}) {
    CAPTURE(undirected);
    auto check_sat = [&](const AlcPtr& c, bool expect) {
      auto phi = alc_to_mp2(c, 1, undirected);
      EnumConfig cfg;
      cfg.n_colors = formula_color_count(phi);
      cfg.max_vertices = undirected ? 2 : 2;
      cfg.undirected = undirected;
      CHECK(brute_sat(phi, cfg).found == expect);
    };
    check_sat(contradiction, false);
    check_sat(some, true);
    check_sat(clash, false);
  }
}

namespace {

EquationSystem fixture_system() {
  // a = 1, c = 1, b = a + c, d = b * c  with solution (1, 2, 1, 2).
  EquationSystem eps;
  eps.n_vars = 4;
  eps.equations.push_back({Equation::Kind::One, 0, 0, 0});
  eps.equations.push_back({Equation::Kind::One, 2, 0, 0});
  eps.equations.push_back({Equation::Kind::Sum, 1, 0, 2});
  eps.equations.push_back({Equation::Kind::Product, 3, 1, 2});
  return eps;
}

}  // namespace

TEST_CASE("equation system solving") {
  auto eps = fixture_system();
  auto sol = eqsys_solve_bounded(eps, 3);
  REQUIRE(sol.has_value());
  CHECK(*sol == std::vector<Integer>{1, 2, 1, 2});
  CHECK(eps.solves(*sol));
  CHECK(!eps.solves({1, 2, 1, 3}));

  EquationSystem unsat;
  unsat.n_vars = 3;
  unsat.equations.push_back({Equation::Kind::One, 0, 0, 0});
  unsat.equations.push_back({Equation::Kind::Sum, 0, 1, 2});
  unsat.equations.push_back({Equation::Kind::One, 1, 0, 0});
  unsat.equations.push_back({Equation::Kind::One, 2, 0, 0});
  CHECK(!eqsys_solve_bounded(unsat, 4).has_value());
}

TEST_CASE("equation system GNN encodings accept their witness graphs") {
  for (const auto& [eps, sol] : {
           std::pair{fixture_system(), std::vector<Integer>{1, 2, 1, 2}},
           std::pair{[] {
                       EquationSystem e;
                       e.n_vars = 1;
                       e.equations.push_back({Equation::Kind::One, 0, 0, 0});
                       return e;
                     }(),
                     std::vector<Integer>{1}},
           std::pair{[] {
                       EquationSystem e;  // d = b * c, no further constraints
                       e.n_vars = 3;
                       e.equations.push_back({Equation::Kind::Product, 0, 1, 2});
                       return e;
                     }(),
                     std::vector<Integer>{6, 2, 3}},
       }) {
    REQUIRE(eps.solves(sol));

    SUBCASE("global readout target") {
      GnnSpec gnn = eqsys_to_gnn(eps, EqsysTarget::OgRelu);
      CHECK(gnn.n_layers() == 15);
      auto [w, v] = eqsys_witness_graph(eps, sol, EqsysTarget::OgRelu);
      // Acceptance is uniform across vertices for this encoding.
      for (int u = 0; u < w.n; ++u) CHECK(accepts(gnn, w, u));
    }
    SUBCASE("local bidirectional target") {
      GnnSpec gnn = eqsys_to_gnn(eps, EqsysTarget::BlRelu);
      CHECK(gnn.local());
      CHECK(gnn.n_layers() == 16);
      auto [w, v] = eqsys_witness_graph(eps, sol, EqsysTarget::BlRelu);
      CHECK(accepts(gnn, w, v));
    }
    SUBCASE("undirected target") {
      GnnSpec gnn = eqsys_to_gnn(eps, EqsysTarget::BlReluUndirected);
      CHECK(gnn.local());
      CHECK(gnn.outgoing_only());
      CHECK(gnn.n_layers() == 22);
      auto [w, v] = eqsys_witness_graph(eps, sol, EqsysTarget::BlReluUndirected);
      CHECK(w.undirected);
      CHECK(accepts(gnn, w, v));
    }
    SUBCASE("counting logic target") {
      auto phi = eqsys_to_mp2(eps);
      auto [w, v] = eqsys_witness_graph(eps, sol, EqsysTarget::Mp2);
      auto acc = eval_all(phi, w);
      for (int u = 0; u < w.n; ++u) CHECK(acc[u]);
    }
  }
}

TEST_CASE("undirected equation-system GNN rejects the all-zero solution") {
  EquationSystem eps;
  eps.n_vars = 3;
  eps.equations.push_back({Equation::Kind::Product, 0, 1, 2});
  GnnSpec gnn = eqsys_to_gnn(eps, EqsysTarget::BlReluUndirected);
  // The all-zero solution's witness is a single bare vertex; the undirected
  // encoding demands a solution with a positive value and must reject it.
  Graph lone(gnn.n_colors, 1);
  lone.undirected = true;
  CHECK(!accepts(gnn, lone, 0));

  auto [w, v] = eqsys_witness_graph(eps, {1, 1, 1}, EqsysTarget::BlReluUndirected);
  CHECK(accepts(gnn, w, v));
}

TEST_CASE("two-counter machines run correctly") {
  TcMachine m;
  m.instructions = {{TcInstruction::Kind::Inc, 0, 0},
                    {TcInstruction::Kind::IfZero, 0, 4},
                    {TcInstruction::Kind::IfZero, 1, 4},
                    {TcInstruction::Kind::Halt, 0, 0}};
  auto run = tcm_run(m, 100);
  REQUIRE(run.halted);
  REQUIRE(run.configs.size() == 4);
  CHECK(run.configs[1] == TcConfiguration{2, 1, 0});
  CHECK(run.configs[2] == TcConfiguration{3, 0, 0});  // decrement branch
  CHECK(run.configs[3] == TcConfiguration{4, 0, 0});  // zero branch jump

  TcMachine loop;
  loop.instructions = {{TcInstruction::Kind::Inc, 0, 0},
                       {TcInstruction::Kind::IfZero, 1, 1},
                       {TcInstruction::Kind::Halt, 0, 0}};
  CHECK(!tcm_run(loop, 50).halted);
}

TEST_CASE("halting computations satisfy the machine formula at every vertex") {
  std::vector<TcMachine> machines(3);
  machines[0].instructions = {{TcInstruction::Kind::Halt, 0, 0}};
  machines[1].instructions = {{TcInstruction::Kind::Inc, 0, 0},
                              {TcInstruction::Kind::Inc, 1, 0},
                              {TcInstruction::Kind::Halt, 0, 0}};
  machines[2].instructions = {{TcInstruction::Kind::Inc, 0, 0},
                              {TcInstruction::Kind::IfZero, 0, 4},
                              {TcInstruction::Kind::IfZero, 1, 4},
                              {TcInstruction::Kind::Halt, 0, 0}};
  for (std::size_t i = 0; i < machines.size(); ++i) {
    CAPTURE(i);
    auto run = tcm_run(machines[i], 100);
    REQUIRE(run.halted);
    for (bool undirected : {false, true}) {
      CAPTURE(undirected);
      auto phi = tcm_to_m2p2(machines[i], undirected);
      Graph w = tcm_witness_graph(machines[i], run, undirected);
      CHECK(w.n_colors == tcm_color_count(machines[i], undirected));
      auto acc = eval_all(phi, w);
      for (int u = 0; u < w.n; ++u) {
        CAPTURE(u);
        CHECK(acc[u]);
      }
    }
  }
}

TEST_CASE("bipolar separation formula distinguishes pole sizes") {
  auto psi = bipolar_separation_formula();
  CHECK(eval_formula(psi, bipolar_graph(3, 3, false), 0));
  CHECK(!eval_formula(psi, bipolar_graph(3, 4, false), 0));
  CHECK(eval_formula(psi, bipolar_graph(0, 0, false), 0));

  GnnSpec gnn = m2p2_to_relu_gnn(psi, 2);
  CHECK(accepts(gnn, bipolar_graph(3, 3, false), 0));
  CHECK(!accepts(gnn, bipolar_graph(3, 4, false), 0));
}

TEST_CASE("indistinguishability threshold saturates local GNNs") {
  // Two layers of clamped counting: each pole vertex clamps its leaf count,
  // the source adds up the clamped pole values.
  GnnSpec gnn;
  gnn.n_colors = 2;
  Layer l1;
  l1.dim = 2;
  l1.act = Activation::trrelu();
  l1.C = {{0, 0}, {0, 0}};
  l1.A_out = {{Rational(1, 2), 0}, {0, Rational(1, 2)}};
  l1.A_in = {{0, 0}, {0, 0}};
  l1.R = {{0, 0}, {0, 0}};
  l1.b = {0, 0};
  Layer l2;
  l2.dim = 1;
  l2.act = Activation::trrelu();
  l2.C = {{0, 0}};
  l2.A_out = {{1, 1}};
  l2.A_in = {{0, 0}};
  l2.R = {{0, 0}};
  l2.b = {0};
  gnn.layers = {l1, l2};

  Integer threshold = bipolar_threshold(gnn);
  CHECK(threshold >= 2);  // the 1/2 slope needs two children to saturate
  long n = (long)threshold.get_si();
  auto fa = forward(gnn, bipolar_graph((int)n, (int)n, false));
  auto fb = forward(gnn, bipolar_graph((int)n, (int)n + 1, false));
  CHECK(fa.back()[0][0] == fb.back()[0][0]);
}

TEST_CASE("star formula hardness GNN accepts its witness tree") {
  std::vector<std::string> vars = {"x"};

  SUBCASE("star-free level only") {
    auto phi = e_eq({{"x", 1}}, 3);
    GnnSpec gnn = epa_to_ol_relu_gnn(phi, vars);
    CHECK(gnn.local());
    CHECK(gnn.outgoing_only());
    auto res = sat_epa_bounded(phi, {3, 3, 100000});
    REQUIRE(res.sat);
    Graph w = epa_hardness_witness_graph(phi, vars, res.assignment, res.witness);
    CHECK(w.n == 4);  // root plus three colored leaves
    CHECK(accepts(gnn, w, 0));
  }

  SUBCASE("one star level") {
    // x = 4 and x is a sum of blocks of size exactly 2.
    auto phi = e_and(e_eq({{"x", 1}}, 4), e_star(e_eq({{"x", 1}}, 2)));
    GnnSpec gnn = epa_to_ol_relu_gnn(phi, vars);
    auto res = sat_epa_bounded(phi, {3, 4, 1000000});
    REQUIRE(res.sat);
    CHECK(res.assignment.at("x") == 4);
    Graph w = epa_hardness_witness_graph(phi, vars, res.assignment, res.witness);
    CHECK(accepts(gnn, w, 0));

    // A malformed decomposition (blocks of size 2 and 1) must be rejected.
    Graph bad(1, 6);
    bad.add_edge(0, 1);
    bad.add_edge(1, 2);
    bad.add_edge(1, 3);
    bad.colors[0].insert(2);
    bad.colors[0].insert(3);
    bad.add_edge(0, 4);
    bad.add_edge(4, 5);
    bad.colors[0].insert(5);
    CHECK(!accepts(gnn, bad, 0));
  }

  SUBCASE("two star levels") {
    std::vector<std::string> xy = {"x", "y"};
    // x = 2y at the top, split into summands with x = y + 1 there, further
    // split into summands with x + y = 1. Values double as child counts in
    // the witness graph, so each level keeps them nonnegative.
    auto nonneg = e_and(e_ge({{"x", 1}}, 0), e_ge({{"y", 1}}, 0));
    auto inner = e_and(e_eq({{"x", 1}, {"y", 1}}, 1), nonneg);
    auto mid = e_and(e_and(e_eq({{"x", 1}, {"y", -1}}, 1), nonneg), e_star(inner));
    auto top = e_and(e_and(e_eq({{"x", 1}, {"y", -2}}, 0), nonneg), e_star(mid));
    GnnSpec gnn = epa_to_ol_relu_gnn(top, xy);
    auto res = sat_epa_bounded(top, {3, 4, 2000000});
    REQUIRE(res.sat);
    Graph w = epa_hardness_witness_graph(top, xy, res.assignment, res.witness);
    CHECK(accepts(gnn, w, 0));
  }
}
