#include "gnnv/spectrum.hpp"

#include <algorithm>
#include <set>

namespace gnnv {

Integer layer_coefficient_denominator(const Layer& l) {
  Integer d = l.act.coefficient_denominator();
  for (const Mat* m : {&l.C, &l.A_out, &l.A_in, &l.R}) {
    for (const auto& row : *m) {
      for (const auto& q : row) d = lcm(d, q.get_den());
    }
  }
  for (const auto& q : l.b) d = lcm(d, q.get_den());
  return d;
}

Integer common_coefficient_denominator(const GnnSpec& gnn) {
  Integer d = 1;
  for (const Layer& l : gnn.layers) d = lcm(d, layer_coefficient_denominator(l));
  return d;
}

namespace {

Integer pow_int(const Integer& base, unsigned long exp) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

}  // namespace

Integer SpectrumOverapprox::vector_count(int layer, int dim) const {
  return pow_int(Integer((long)entry_values[layer].size()), (unsigned long)dim);
}

std::vector<Vec> SpectrumOverapprox::vectors(int layer, int dim) const {
  const auto& vals = entry_values[layer];
  std::vector<Vec> out;
  Vec cur(dim, Rational(0));
  std::vector<std::size_t> idx(dim, 0);
  while (true) {
    for (int i = 0; i < dim; ++i) cur[i] = vals[idx[i]];
    out.push_back(cur);
    int i = dim - 1;
    while (i >= 0 && ++idx[i] == vals.size()) {
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

bool SpectrumOverapprox::contains(int layer, const Vec& value) const {
  const auto& vals = entry_values[layer];
  for (const auto& q : value) {
    if (!std::binary_search(vals.begin(), vals.end(), q)) return false;
  }
  return true;
}

SpectrumOverapprox overapprox_spectrum(const GnnSpec& gnn, long size_cap) {
  SpectrumOverapprox sp;
  sp.capacity.push_back(1);
  sp.entry_values.push_back({Rational(0), Rational(1)});

  for (int l = 1; l <= gnn.n_layers(); ++l) {
    const Layer& layer = gnn.layers[l - 1];
    if (!layer.act.eventually_constant()) {
      throw NotEventuallyConstantError("layer " + std::to_string(l) +
                                       " activation is not eventually constant");
    }
    Integer prev_lcd = 1;
    for (const auto& q : sp.entry_values[l - 1]) prev_lcd = lcm(prev_lcd, q.get_den());
    Integer c = prev_lcd * layer_coefficient_denominator(layer);

    Rational tl = layer.act.left_threshold();
    Rational tr = layer.act.right_threshold();
    // One extra grid point on each side stands in for every pre-activation
    // beyond a threshold; there the activation is flat, so the representative
    // realizes the same value.
    Integer k_lo = rational_ceil(Rational(c) * tl) - 1;
    Integer k_hi = rational_floor(Rational(c) * tr) + 1;

    Integer per_entry = k_hi - k_lo + 1;
    if (per_entry > size_cap) {
      throw ResourceLimitError("layer " + std::to_string(l) +
                               " grid would exceed the size cap");
    }

    std::set<Rational> values;
    for (Integer k = k_lo; k <= k_hi; ++k) {
      values.insert(layer.act.apply(Rational(k) / Rational(c)));
    }
    // Entries of one layer range over the same value set, so the layer has
    // |values|^dim candidate vectors; cap that count after deduplication.
    if (pow_int(Integer((long)values.size()), (unsigned long)layer.dim) > size_cap) {
      throw ResourceLimitError("layer " + std::to_string(l) +
                               " spectrum would exceed the size cap");
    }
    // The stored capacity also absorbs the activation-output denominators, so
    // every realizable feature denominator divides the capacity product.
    for (const auto& q : values) c = lcm(c, q.get_den());
    sp.capacity.push_back(c);
    sp.entry_values.emplace_back(values.begin(), values.end());
  }
  return sp;
}

bool spectrum_membership(const GnnSpec& gnn, const Graph& g, const SpectrumOverapprox& sp) {
  FeatureTable t = forward(gnn, g);
  for (int l = 0; l < (int)t.size(); ++l) {
    for (int v = 0; v < g.n; ++v) {
      if (!sp.contains(l, t[l][v])) return false;
    }
  }
  return true;
}

GnnConstants gnn_constants(const GnnSpec& gnn) {
  GnnConstants k;
  k.d_common = 1;
  Integer max_num = 1;
  for (const Layer& l : gnn.layers) {
    k.total_dim += l.dim;
    k.d_common = lcm(k.d_common, layer_coefficient_denominator(l));
    for (const Mat* m : {&l.C, &l.A_out, &l.A_in, &l.R}) {
      for (const auto& row : *m) {
        for (const auto& q : row) max_num = std::max(max_num, Integer(abs(q.get_num())));
      }
    }
    for (const auto& q : l.b) max_num = std::max(max_num, Integer(abs(q.get_num())));
  }
  k.coeff_magnitude = 2 * k.d_common * max_num;

  k.capacity_product = 1;
  // The capacity recursion needs eventually constant activations; for other
  // GNNs only the denominator-based constants are meaningful.
  bool ec = true;
  for (const Layer& l : gnn.layers) ec = ec && l.act.eventually_constant();
  if (ec) {
    SpectrumOverapprox sp = overapprox_spectrum(gnn);
    for (std::size_t i = 1; i < sp.capacity.size(); ++i) k.capacity_product *= sp.capacity[i];
  }
  return k;
}

}  // namespace gnnv
