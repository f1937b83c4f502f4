#pragma once

#include <optional>
#include <vector>

#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"

namespace gnnv {

// Fixed-point form of a network for repeated evaluation over many graphs:
// features of layer l are stored multiplied by a per-layer integer scale, so
// the whole forward pass runs in 64-bit arithmetic. The scale of layer l is
// scale(l-1) * cden * actden, where cden clears the layer's coefficients and
// actden the activation's outputs. Compilation fails when a constant does not
// fit; evaluation fails when an intermediate value overflows. Exact rational
// fallback is the caller's responsibility.
class FixedPointGnn {
 public:
  static std::optional<FixedPointGnn> compile(const GnnSpec& gnn);

  int n_layers() const { return (int)layers_.size(); }
  long scale(int layer) const { return scales_[layer]; }  // scale(0) == 1

  // Acceptance flag per vertex.
  std::optional<std::vector<char>> accepted(const Graph& g) const;

  // Scaled features of layers 1..n_layers(); out[l-1][v * dim(l) + i] holds
  // feature entry i of vertex v at layer l, multiplied by scale(l).
  std::optional<std::vector<std::vector<long>>> features(const Graph& g) const;

 private:
  struct Row {
    std::vector<std::pair<int, long>> e;
  };
  struct FPiece {
    bool has_upto = false;
    long upto = 0, slope = 0, icept = 0;
  };
  struct Lay {
    int dim = 1;
    std::vector<long> b;
    std::vector<Row> C, A_out, A_in, R;
    std::vector<int> cols_out, cols_in, cols_global;
    std::vector<FPiece> pieces;
  };

  std::optional<std::vector<char>> run(const Graph& g,
                                       std::vector<std::vector<long>>* keep) const;

  int n_colors_ = 1;
  std::vector<Lay> layers_;
  std::vector<long> scales_;  // scales_[0] == 1, one extra entry per layer
};

}  // namespace gnnv
