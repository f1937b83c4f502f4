#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace gnnv {

// Exact arithmetic only. GMP keeps mpq_class canonical (lowest terms,
// positive denominator), which is exactly the invariant we need.
using Integer = mpz_class;
using Rational = mpq_class;

using Vec = std::vector<Rational>;
using Mat = std::vector<Vec>;

// Parses "p/q" or "p" with optional sign; throws std::invalid_argument on
// malformed input or zero denominator.
Rational parse_rational(const std::string& s);

// Serializes as "p/q", or just "p" when the denominator is 1.
std::string rational_to_string(const Rational& q);

Integer lcm(const Integer& a, const Integer& b);

// Least common multiple of the denominators of all entries (1 for empty input).
Integer common_denominator(const Vec& values);

Rational dot(const Vec& row, const Vec& x);

// A*x + accumulate into out (out must have A's row count).
void add_mat_vec(Vec& out, const Mat& a, const Vec& x);

Vec zero_vec(std::size_t n);

inline Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Integer ceil_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Integer rational_floor(const Rational& q) {
  return floor_div(q.get_num(), q.get_den());
}

inline Integer rational_ceil(const Rational& q) {
  return ceil_div(q.get_num(), q.get_den());
}

}  // namespace gnnv
