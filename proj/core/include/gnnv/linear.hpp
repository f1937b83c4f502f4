#pragma once

#include <optional>
#include <vector>

#include "gnnv/errors.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

// One linear constraint  a . x  rel  c  with rel in {>=, <=, =}.
enum class LinRel { Ge, Le, Eq };

struct LinConstraint {
  Vec a;
  LinRel rel = LinRel::Ge;
  Rational c;
};

// Feasibility of the constraints together with x >= 0, over the rationals.
// Returns a basic feasible point (exact phase-one simplex, Bland's rule).
std::optional<Vec> lp_feasible(int n_vars, const std::vector<LinConstraint>& rows);

// A point of {rows, x >= 0} with integer coordinates, found by branch and
// bound on fractional coordinates of exact relaxation solutions. Throws
// ResourceLimitError when the node budget runs out before an answer.
std::optional<std::vector<Integer>> ilp_point(int n_vars,
                                              const std::vector<LinConstraint>& rows,
                                              long node_budget = 200'000);

// Lexicographically least integer point under the fixed variable order,
// obtained by coordinate-wise minimization over ilp_point.
std::optional<std::vector<Integer>> ilp_lex_least(int n_vars,
                                                  const std::vector<LinConstraint>& rows,
                                                  long node_budget = 200'000);

}  // namespace gnnv
