#pragma once

#include <vector>

#include "gnnv/errors.hpp"
#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

// Finite superset of the per-layer feature values. Each layer's vector set
// is a full box product, so it is stored entrywise: layer l realizes a
// subset of entry_values[l]^dim(l).
struct SpectrumOverapprox {
  std::vector<Integer> capacity;               // capacity[l], capacity[0] = 1
  std::vector<std::vector<Rational>> entry_values;  // sorted, distinct

  // Number of vectors at a layer (|entry_values|^dim); throws
  // ResourceLimitError above the cap used at construction time.
  Integer vector_count(int layer, int dim) const;

  // Materializes the layer's vector set in lexicographic order.
  std::vector<Vec> vectors(int layer, int dim) const;

  bool contains(int layer, const Vec& value) const;
};

// The inductive over-approximation: layer 0 is {0,1}^dim, and layer l holds
// the activation images of k/capacity[l] for integer k between the scaled
// thresholds. Requires every activation to be eventually constant.
SpectrumOverapprox overapprox_spectrum(const GnnSpec& gnn, long size_cap = 1'000'000);

// lcm of the denominators of a layer's matrices, bias, and activation pieces.
Integer layer_coefficient_denominator(const Layer& l);

// lcm of layer_coefficient_denominator over all layers.
Integer common_coefficient_denominator(const GnnSpec& gnn);

// True iff every feature value of forward(gnn, g) lies in the overapprox.
bool spectrum_membership(const GnnSpec& gnn, const Graph& g,
                         const SpectrumOverapprox& sp);

struct GnnConstants {
  Integer d_common;          // lcm of coefficient and activation denominators
  long total_dim = 0;        // sum of layer dimensions (layer 0 excluded)
  Integer coeff_magnitude;   // 2 * d_common * max |numerator| of coefficients
  Integer capacity_product;  // product of layer capacities
};

GnnConstants gnn_constants(const GnnSpec& gnn);

}  // namespace gnnv
