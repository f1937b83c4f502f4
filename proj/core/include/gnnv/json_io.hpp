#pragma once

#include <json.hpp>

#include "gnnv/epa.hpp"
#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/logic.hpp"

namespace gnnv {

using Json = nlohmann::ordered_json;

// Graphs: {"n_colors": 2, "vertices": 3, "edges": [[0,1]],
//          "colors": {"1": [0], "2": []}, "undirected": false}
Json graph_to_json(const Graph& g);
Graph graph_from_json(const Json& j);

// GNNs: {"n_colors": 1, "layers": [{"dim": 1, "activation": "trrelu",
//        "C": [["0"]], "A_out": [["1/2"]], "A_in": ..., "R": ..., "b": ["0"]}]}
// Activation is "trrelu", "relu", or {"pieces": [{"upto": "0", "slope": "0",
// "intercept": "0"}, ...]} with a null "upto" on the last piece.
Json gnn_to_json(const GnnSpec& gnn);
GnnSpec gnn_from_json(const Json& j);

// Formulas: {"op": "pres", "terms": [{"lambda": 1, "guard": "out",
//            "body": {"op": "top"}}], "cmp": ">=", "delta": 2}
Json formula_to_json(const FormulaPtr& phi);
FormulaPtr formula_from_json(const Json& j);

// EPA formulas: {"op": "star", "sub": {"op": "linge", "rows":
//                [{"coeffs": {"x": "1"}, "rhs": "2"}]}}
Json epa_to_json(const EpaPtr& phi);
EpaPtr epa_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace gnnv
