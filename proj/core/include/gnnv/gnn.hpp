#pragma once

#include <vector>

#include "gnnv/activation.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

struct Layer {
  int dim = 1;
  Activation act;
  Mat C;      // combines the vertex's own previous feature
  Mat A_out;  // aggregates over out-neighbors
  Mat A_in;   // aggregates over in-neighbors
  Mat R;      // global readout over all vertices
  Vec b;
};

struct GnnSpec {
  int n_colors = 1;  // also the layer-0 dimension
  std::vector<Layer> layers;

  int n_layers() const { return (int)layers.size(); }
  int dim(int layer) const { return layer == 0 ? n_colors : layers[layer - 1].dim; }

  bool local() const;          // all R matrices zero
  bool outgoing_only() const;  // all A_in matrices zero
  bool all_trrelu() const;

  void validate() const;  // shape consistency, layer count >= 1
};

// features[layer][vertex] is the layer's feature vector of the vertex.
using FeatureTable = std::vector<std::vector<Vec>>;

// The first l+1 feature vectors of one vertex; entries[t] has length dim(t).
struct History {
  std::vector<Vec> entries;

  int depth() const { return (int)entries.size() - 1; }
  auto operator<=>(const History&) const = default;
};

FeatureTable forward(const GnnSpec& gnn, const Graph& g);

// Row-sparse snapshot of a GNN, for repeated forward passes over many graphs.
// Skips zero coefficients and whole aggregation modes that are unused.
struct ForwardPlan {
  struct SparseRow {
    std::vector<std::pair<int, Rational>> entries;
  };
  struct LayerPlan {
    int dim = 1;
    Activation act;
    Vec b;
    std::vector<SparseRow> C, A_out, A_in, R;
    // Previous-layer columns actually read by each aggregation matrix.
    std::vector<int> cols_out, cols_in, cols_global;
    bool any_out = false, any_in = false, any_global = false;
  };
  int n_colors = 1;
  std::vector<LayerPlan> layers;
};

ForwardPlan make_forward_plan(const GnnSpec& gnn);
FeatureTable forward(const ForwardPlan& plan, const Graph& g);

// Acceptance: first entry of the last layer's feature is >= 1/2.
bool accepts(const GnnSpec& gnn, const Graph& g, int v);
bool accepts_feature(const Vec& last_feature);

History history(const GnnSpec& gnn, const Graph& g, int v, int l);
History history_from_table(const FeatureTable& t, int v, int l);

// Entrywise sum of histories of equal depth (empty input gives zeros).
History history_sum(const std::vector<History>& hs, const GnnSpec& gnn, int depth);

// Recomputes the l-history of a vertex from its initial feature and the
// entrywise sums of the (l-1)-histories of its out-neighbors, in-neighbors
// and all vertices. Agrees with history() on every concrete graph.
History history_step(const GnnSpec& gnn, const Vec& initial, const History& out_sum,
                     const History& in_sum, const History& global_sum, int l);

}  // namespace gnnv
