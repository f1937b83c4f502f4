#include "gnnv/rational.hpp"

#include <stdexcept>

namespace gnnv {

Rational parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  mpq_class q;
  if (q.set_str(s, 10) != 0) {
    throw std::invalid_argument("malformed rational literal: " + s);
  }
  if (q.get_den() == 0) {
    throw std::invalid_argument("zero denominator in rational literal: " + s);
  }
  q.canonicalize();
  return q;
}

std::string rational_to_string(const Rational& q) {
  return q.get_str();
}

Integer lcm(const Integer& a, const Integer& b) {
  Integer r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

Integer common_denominator(const Vec& values) {
  Integer d = 1;
  for (const auto& v : values) d = lcm(d, v.get_den());
  return d;
}

Rational dot(const Vec& row, const Vec& x) {
  if (row.size() != x.size()) throw std::invalid_argument("dot: size mismatch");
  Rational acc = 0;
  for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * x[i];
  return acc;
}

void add_mat_vec(Vec& out, const Mat& a, const Vec& x) {
  if (out.size() != a.size()) throw std::invalid_argument("add_mat_vec: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += dot(a[i], x);
}

Vec zero_vec(std::size_t n) {
  return Vec(n, Rational(0));
}

}  // namespace gnnv
