#include <doctest.h>

#include <algorithm>

#include "gnnv/errors.hpp"
#include "gnnv/oracle.hpp"
#include "gnnv/spectrum.hpp"

using namespace gnnv;

namespace {

GnnSpec quarter_counter() {
  // One layer: clamp(out-degree / 4) into [0, 1].
  GnnSpec gnn;
  gnn.n_colors = 1;
  Layer l;
  l.dim = 1;
  l.act = Activation::trrelu();
  l.C = {{0}};
  l.A_out = {{Rational(1, 4)}};
  l.A_in = {{0}};
  l.R = {{0}};
  l.b = {0};
  gnn.layers = {l};
  return gnn;
}

}  // namespace

TEST_CASE("quarter-step counter has exactly five layer-1 values") {
  GnnSpec gnn = quarter_counter();
  auto sp = overapprox_spectrum(gnn);
  REQUIRE(sp.entry_values.size() == 2);
  CHECK(sp.entry_values[0] == std::vector<Rational>{0, 1});
  CHECK(sp.entry_values[1] ==
        std::vector<Rational>{0, Rational(1, 4), Rational(1, 2), Rational(3, 4), 1});
  CHECK(sp.vector_count(1, 1) == 5);
  CHECK(sp.contains(1, {Rational(3, 4)}));
  CHECK(!sp.contains(1, {Rational(1, 3)}));

  // Every value is realized: a star with k leaves has feature k/4 at the hub.
  for (int k = 0; k <= 4; ++k) {
    Graph star(1, k + 1);
    for (int i = 1; i <= k; ++i) {
      star.add_edge(0, i);
      star.colors[0].insert(i);
    }
    auto feat = forward(gnn, star);
    CHECK(feat[1][0][0] == sp.entry_values[1][k]);
  }
}

TEST_CASE("denominators divide the layer capacity") {
  RandomSuite suite(31337);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 3;
  for (int trial = 0; trial < 30; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    auto sp = overapprox_spectrum(gnn);
    for (int l = 1; l <= gnn.n_layers(); ++l) {
      for (const auto& q : sp.entry_values[l]) {
        CHECK(sp.capacity[l] % q.get_den() == 0);
      }
      CHECK(std::is_sorted(sp.entry_values[l].begin(), sp.entry_values[l].end()));
    }
  }
}

TEST_CASE("features of every small graph lie in the overapproximation") {
  RandomSuite suite(60601);
  RandomGnnOptions opt;
  opt.max_layers = 2;
  opt.max_dim = 2;
  opt.max_denominator = 3;
  opt.local = false;
  for (int trial = 0; trial < 15; ++trial) {
    GnnSpec gnn = suite.gnn(opt);
    auto sp = overapprox_spectrum(gnn);
    EnumConfig cfg;
    cfg.n_colors = 1;
    cfg.max_vertices = 3;
    bool all_in = true;
    enumerate_graphs(cfg, [&](const Graph& g) {
      all_in = spectrum_membership(gnn, g, sp);
      return all_in;
    });
    CHECK(all_in);
  }
}

TEST_CASE("unclamped activations are rejected") {
  GnnSpec gnn = quarter_counter();
  gnn.layers[0].act = Activation::relu();
  CHECK_THROWS_AS(overapprox_spectrum(gnn), NotEventuallyConstantError);
}

TEST_CASE("size cap raises a resource error") {
  GnnSpec gnn = quarter_counter();
  gnn.layers[0].A_out = {{Rational(1, 1000)}};
  CHECK_THROWS_AS(overapprox_spectrum(gnn, 100), ResourceLimitError);
}

TEST_CASE("aggregate constants") {
  GnnSpec gnn = quarter_counter();
  CHECK(layer_coefficient_denominator(gnn.layers[0]) == 4);
  CHECK(common_coefficient_denominator(gnn) == 4);
  auto k = gnn_constants(gnn);
  CHECK(k.d_common == 4);
  CHECK(k.total_dim == 1);
  CHECK(k.coeff_magnitude > 0);
  CHECK(k.capacity_product >= 4);
}
