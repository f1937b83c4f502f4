#pragma once

#include <string>

#include "gnnv/logic.hpp"

namespace gnnv {

// Parses the textual formula syntax, e.g.
//   (pres ((1 out top) (-1 in (U 1))) ">=" 2)
//   (and (U 1) (not (U 2)))
//   (twohop ((1 out out (U 1))) ((-1 out (U 1))) "=" 0)
// Colors are written 1-based. or/implies are accepted and desugared.
// This inverts formula_key().
FormulaPtr parse_formula_sexpr(const std::string& text);

inline std::string formula_to_sexpr(const FormulaPtr& phi) { return formula_key(phi); }

}  // namespace gnnv
