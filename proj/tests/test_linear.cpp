#include <doctest.h>

#include "gnnv/linear.hpp"

using namespace gnnv;

TEST_CASE("rational feasibility") {
  // x + y >= 2, x <= 1 is feasible over the nonnegative rationals.
  std::vector<LinConstraint> rows = {
      {{1, 1}, LinRel::Ge, 2},
      {{1, 0}, LinRel::Le, 1},
  };
  auto p = lp_feasible(2, rows);
  REQUIRE(p.has_value());
  CHECK((*p)[0] + (*p)[1] >= 2);
  CHECK((*p)[0] <= 1);
  CHECK((*p)[0] >= 0);
  CHECK((*p)[1] >= 0);

  // x >= 1, x <= 1/2 is not.
  std::vector<LinConstraint> bad = {
      {{1}, LinRel::Ge, 1},
      {{1}, LinRel::Le, Rational(1, 2)},
  };
  CHECK(!lp_feasible(1, bad).has_value());
}

TEST_CASE("integer points") {
  // x + y = 2: the lexicographically least nonnegative integer point is (0, 2).
  std::vector<LinConstraint> eq = {{{1, 1}, LinRel::Eq, 2}};
  auto lex = ilp_lex_least(2, eq);
  REQUIRE(lex.has_value());
  CHECK(*lex == std::vector<Integer>{0, 2});

  // 2x = 1 has rational solutions but no integer ones.
  std::vector<LinConstraint> half = {{{2}, LinRel::Eq, 1}};
  CHECK(lp_feasible(1, half).has_value());
  CHECK(!ilp_point(1, half).has_value());

  // x - y = 1, x <= 3: any integer point works, lex-least is (1, 0).
  std::vector<LinConstraint> band = {
      {{1, -1}, LinRel::Eq, 1},
      {{1, 0}, LinRel::Le, 3},
  };
  auto p = ilp_point(2, band);
  REQUIRE(p.has_value());
  CHECK((*p)[0] - (*p)[1] == 1);
  CHECK((*p)[0] <= 3);
  auto q = ilp_lex_least(2, band);
  REQUIRE(q.has_value());
  CHECK(*q == std::vector<Integer>{1, 0});
}
