#include <doctest.h>

#include "gnnv/oracle.hpp"
#include "gnnv/translate.hpp"

using namespace gnnv;

TEST_CASE("network-to-formula translation is exact on small graphs") {
  RandomSuite suite(1001);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 2;
  for (int trial = 0; trial < 30; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    auto phi = gnn_to_mp2(gnn);
    CHECK(dialect_of(phi).local());
    EnumConfig cfg;
    cfg.n_colors = 1;
    cfg.max_vertices = 3;
    auto res = equivalence_check(gnn, phi, cfg);
    CHECK(res.equivalent);
  }
}

TEST_CASE("formula-to-network translation is exact on small graphs") {
  RandomSuite suite(2002);
  RandomFormulaOptions opt;
  opt.max_depth = 2;
  opt.n_colors = 1;
  for (int trial = 0; trial < 30; ++trial) {
    auto phi = suite.formula(opt);
    GnnSpec gnn = mp2_to_trrelu_gnn(phi, opt.n_colors);
    gnn.validate();
    CHECK(gnn.all_trrelu());
    CHECK(gnn.local());
    EnumConfig cfg;
    cfg.n_colors = opt.n_colors;
    cfg.max_vertices = 3;
    auto res = equivalence_check(phi, gnn, cfg);
    CHECK(res.equivalent);
  }
}

TEST_CASE("translation round trip reaches a fixpoint of behavior") {
  RandomSuite suite(3003);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 1;
  opt.max_denominator = 2;
  for (int trial = 0; trial < 10; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    GnnSpec round = mp2_to_trrelu_gnn(gnn_to_mp2(gnn), 1);
    EnumConfig cfg;
    cfg.n_colors = 1;
    cfg.max_vertices = 3;
    CHECK(equivalence_check(gnn, round, cfg).equivalent);
  }
}

TEST_CASE("translations preserve the outgoing-only restriction") {
  RandomSuite suite(4004);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 1;
  opt.max_denominator = 2;
  opt.outgoing_only = true;
  for (int trial = 0; trial < 10; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    auto phi = gnn_to_mp2(gnn);
    CHECK(dialect_of(phi).outgoing_only());
    GnnSpec back = mp2_to_trrelu_gnn(phi, 1);
    CHECK(back.outgoing_only());
  }
}

TEST_CASE("two-hop formulas compile to untruncated networks") {
  // #pairs(out, out) = #out-neighbors, true exactly on graphs where every
  // out-neighbor of the vertex has exactly one out-neighbor of its own.
  auto phi = f_twohop({{1, true, true, f_top()}}, {{-1, Guard::Out, f_top()}}, Cmp::Eq, 0);
  GnnSpec gnn = m2p2_to_relu_gnn(phi, 1);
  gnn.validate();
  CHECK(gnn.local());
  EnumConfig cfg;
  cfg.n_colors = 1;
  cfg.max_vertices = 3;
  CHECK(equivalence_check(phi, gnn, cfg).equivalent);
}

TEST_CASE("color counting") {
  CHECK(formula_color_count(f_top()) == 0);
  CHECK(formula_color_count(f_color(0)) == 1);
  CHECK(formula_color_count(f_and(f_color(2), f_color(0))) == 3);
}
