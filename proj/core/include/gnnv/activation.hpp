#pragma once

#include <optional>
#include <vector>

#include "gnnv/rational.hpp"

namespace gnnv {

// One affine piece of a piecewise linear function. The piece is valid for
// arguments strictly below `upto` (and at or above the previous piece's
// `upto`): every breakpoint belongs to the piece on its right. The last
// piece has no `upto`.
struct Piece {
  std::optional<Rational> upto;
  Rational slope;
  Rational intercept;
};

struct Activation {
  std::vector<Piece> pieces;

  static Activation relu();     // 0 below 0, identity from 0 on
  static Activation trrelu();   // 0 below 0, identity on [0,1), 1 from 1 on
  static Activation identity();

  Rational apply(const Rational& q) const;

  // Eventually constant: first and last pieces are flat and the thresholds
  // t_l (first breakpoint) and t_r (last breakpoint) satisfy t_l < t_r.
  bool eventually_constant() const;
  Rational left_threshold() const;   // t_l; requires eventually_constant()
  Rational right_threshold() const;  // t_r

  bool is_trrelu() const;

  // lcm of the denominators of all breakpoints, slopes and intercepts.
  Integer coefficient_denominator() const;

  // Throws if breakpoints are not strictly increasing or pieces are empty.
  void validate() const;

  bool operator==(const Activation& o) const;
};

}  // namespace gnnv
