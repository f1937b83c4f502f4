#include "gnnv/activation.hpp"

#include <stdexcept>

namespace gnnv {

Activation Activation::relu() {
  Activation a;
  a.pieces.push_back({Rational(0), Rational(0), Rational(0)});
  a.pieces.push_back({std::nullopt, Rational(1), Rational(0)});
  return a;
}

Activation Activation::trrelu() {
  Activation a;
  a.pieces.push_back({Rational(0), Rational(0), Rational(0)});
  a.pieces.push_back({Rational(1), Rational(1), Rational(0)});
  a.pieces.push_back({std::nullopt, Rational(0), Rational(1)});
  return a;
}

Activation Activation::identity() {
  Activation a;
  a.pieces.push_back({std::nullopt, Rational(1), Rational(0)});
  return a;
}

Rational Activation::apply(const Rational& q) const {
  for (const auto& p : pieces) {
    if (!p.upto || q < *p.upto) return p.slope * q + p.intercept;
  }
  throw std::logic_error("activation pieces do not cover the argument");
}

bool Activation::eventually_constant() const {
  if (pieces.size() < 2) return false;
  if (pieces.front().slope != 0 || pieces.back().slope != 0) return false;
  return left_threshold() < right_threshold();
}

Rational Activation::left_threshold() const {
  return *pieces.front().upto;
}

Rational Activation::right_threshold() const {
  return *pieces[pieces.size() - 2].upto;
}

bool Activation::is_trrelu() const {
  return *this == trrelu();
}

Integer Activation::coefficient_denominator() const {
  Integer d = 1;
  for (const auto& p : pieces) {
    if (p.upto) d = lcm(d, p.upto->get_den());
    d = lcm(d, p.slope.get_den());
    d = lcm(d, p.intercept.get_den());
  }
  return d;
}

void Activation::validate() const {
  if (pieces.empty()) throw std::invalid_argument("activation has no pieces");
  if (pieces.back().upto) throw std::invalid_argument("last piece must be unbounded");
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    if (!pieces[i].upto) throw std::invalid_argument("only the last piece may be unbounded");
    if (i > 0 && !(*pieces[i - 1].upto < *pieces[i].upto)) {
      throw std::invalid_argument("breakpoints must be strictly increasing");
    }
  }
}

bool Activation::operator==(const Activation& o) const {
  if (pieces.size() != o.pieces.size()) return false;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& a = pieces[i];
    const auto& b = o.pieces[i];
    if (a.upto.has_value() != b.upto.has_value()) return false;
    if (a.upto && *a.upto != *b.upto) return false;
    if (a.slope != b.slope || a.intercept != b.intercept) return false;
  }
  return true;
}

}  // namespace gnnv
