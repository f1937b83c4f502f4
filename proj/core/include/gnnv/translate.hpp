#pragma once

#include "gnnv/gnn.hpp"
#include "gnnv/logic.hpp"
#include "gnnv/spectrum.hpp"

namespace gnnv {

// Formula accepting exactly the (graph, vertex) pairs the GNN accepts.
// Requires eventually constant activations; the formula's dialect mirrors
// the GNN's flags (local, outgoing-only).
FormulaPtr gnn_to_mp2(const GnnSpec& gnn, long size_cap = 1'000'000);

// Truncated-ReLU GNN equivalent to the formula, one extra hidden entry per
// distinct subformula plus one per color. Local/outgoing-only formulas give
// local/outgoing-only GNNs. Rejects two-hop quantifiers.
GnnSpec mp2_to_trrelu_gnn(const FormulaPtr& phi, int min_colors = 0);

// ReLU GNN equivalent to a (local) formula that may use two-hop
// quantifiers; 3 layers per subformula plus a final copy.
GnnSpec m2p2_to_relu_gnn(const FormulaPtr& phi, int min_colors = 0);

// Largest color index referenced, plus one (0 when no colors occur).
int formula_color_count(const FormulaPtr& phi);

}  // namespace gnnv
