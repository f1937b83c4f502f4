#include "gnnv/linear.hpp"

#include <stdexcept>

namespace gnnv {

namespace {

// Dense phase-one simplex tableau with Bland's rule; all entries exact.
struct Tableau {
  int n_cols = 0;  // excluding the rhs column
  std::vector<Vec> rows;
  Vec rhs;
  Vec cost;
  Rational obj;  // current value of the phase-one objective
  std::vector<int> basis;

  void pivot(int r, int j) {
    Rational p = rows[r][j];
    for (auto& q : rows[r]) q /= p;
    rhs[r] /= p;
    for (int i = 0; i < (int)rows.size(); ++i) {
      if (i == r || rows[i][j] == 0) continue;
      Rational f = rows[i][j];
      for (int k = 0; k < n_cols; ++k) rows[i][k] -= f * rows[r][k];
      rhs[i] -= f * rhs[r];
    }
    if (cost[j] != 0) {
      Rational f = cost[j];
      for (int k = 0; k < n_cols; ++k) cost[k] -= f * rows[r][k];
      obj -= f * rhs[r];
    }
    basis[r] = j;
  }
};

}  // namespace

std::optional<Vec> lp_feasible(int n_vars, const std::vector<LinConstraint>& rows) {
  int m = (int)rows.size();
  // Column layout: structural | one slack per inequality | one artificial per
  // row that lacks a ready-made basic column.
  int n_slack = 0;
  for (const auto& r : rows) {
    if (r.rel != LinRel::Eq) ++n_slack;
  }
  int slack_base = n_vars;
  int art_base = n_vars + n_slack;

  // First pass to decide which rows need artificials (slack must enter with
  // coefficient +1 after the rhs is made nonnegative).
  std::vector<int> slack_col(m, -1), slack_sign(m, 0);
  std::vector<bool> needs_art(m, false);
  {
    int s = 0;
    for (int i = 0; i < m; ++i) {
      Rational c = rows[i].c;
      int flip = c < 0 ? -1 : 1;
      if (rows[i].rel == LinRel::Eq) {
        needs_art[i] = true;
      } else {
        slack_col[i] = slack_base + s++;
        slack_sign[i] = (rows[i].rel == LinRel::Le ? 1 : -1) * flip;
        needs_art[i] = slack_sign[i] < 0;
      }
    }
  }
  int n_art = 0;
  std::vector<int> art_col(m, -1);
  for (int i = 0; i < m; ++i) {
    if (needs_art[i]) art_col[i] = art_base + n_art++;
  }

  Tableau t;
  t.n_cols = art_base + n_art;
  t.rows.assign(m, Vec(t.n_cols, Rational(0)));
  t.rhs.assign(m, Rational(0));
  t.cost.assign(t.n_cols, Rational(0));
  t.basis.assign(m, -1);

  for (int i = 0; i < m; ++i) {
    int flip = rows[i].c < 0 ? -1 : 1;
    for (int j = 0; j < n_vars; ++j) t.rows[i][j] = Rational(flip) * rows[i].a[j];
    t.rhs[i] = Rational(flip) * rows[i].c;
    if (slack_col[i] >= 0) t.rows[i][slack_col[i]] = slack_sign[i];
    if (art_col[i] >= 0) {
      t.rows[i][art_col[i]] = 1;
      t.basis[i] = art_col[i];
    } else {
      t.basis[i] = slack_col[i];
    }
  }
  // Reduced costs for "minimize the sum of artificials".
  for (int i = 0; i < m; ++i) {
    if (art_col[i] < 0) continue;
    for (int k = 0; k < t.n_cols; ++k) t.cost[k] -= t.rows[i][k];
    t.obj -= t.rhs[i];
  }
  for (int i = 0; i < m; ++i) {
    if (art_col[i] >= 0) t.cost[art_col[i]] += 1;
  }

  while (true) {
    int enter = -1;
    for (int j = 0; j < t.n_cols; ++j) {
      if (t.cost[j] < 0) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    Rational best;
    for (int i = 0; i < m; ++i) {
      if (t.rows[i][enter] <= 0) continue;
      Rational ratio = t.rhs[i] / t.rows[i][enter];
      if (leave < 0 || ratio < best ||
          (ratio == best && t.basis[i] < t.basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) throw std::logic_error("phase-one objective unbounded");
    t.pivot(leave, enter);
  }

  if (t.obj != 0) return std::nullopt;
  Vec x(n_vars, Rational(0));
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] < n_vars) x[t.basis[i]] = t.rhs[i];
  }
  return x;
}

namespace {

std::optional<std::vector<Integer>> ilp_rec(int n_vars, std::vector<LinConstraint>& rows,
                                            long& budget) {
  if (budget-- <= 0) throw ResourceLimitError("integer feasibility node budget exhausted");
  auto x = lp_feasible(n_vars, rows);
  if (!x) return std::nullopt;

  int frac = -1;
  for (int j = 0; j < n_vars; ++j) {
    if ((*x)[j].get_den() != 1) {
      frac = j;
      break;
    }
  }
  if (frac < 0) {
    std::vector<Integer> out(n_vars);
    for (int j = 0; j < n_vars; ++j) out[j] = (*x)[j].get_num();
    return out;
  }

  Integer f = rational_floor((*x)[frac]);
  LinConstraint bound;
  bound.a = zero_vec(n_vars);
  bound.a[frac] = 1;
  bound.rel = LinRel::Le;
  bound.c = Rational(f);
  rows.push_back(bound);
  if (auto r = ilp_rec(n_vars, rows, budget)) {
    rows.pop_back();
    return r;
  }
  rows.back().rel = LinRel::Ge;
  rows.back().c = Rational(f + 1);
  auto r = ilp_rec(n_vars, rows, budget);
  rows.pop_back();
  return r;
}

}  // namespace

std::optional<std::vector<Integer>> ilp_point(int n_vars,
                                              const std::vector<LinConstraint>& rows,
                                              long node_budget) {
  // Divisibility screen: an all-integer equality whose coefficient gcd does
  // not divide the constant has no integer solution.
  for (const auto& r : rows) {
    if (r.rel != LinRel::Eq) continue;
    Integer l = 1;
    for (const auto& q : r.a) l = lcm(l, q.get_den());
    Rational c = r.c * Rational(l);
    if (c.get_den() != 1) return std::nullopt;
    Integer g = 0;
    for (const auto& q : r.a) {
      Rational s = q * Rational(l);
      Integer gg;
      mpz_gcd(gg.get_mpz_t(), g.get_mpz_t(), s.get_num().get_mpz_t());
      g = gg;
    }
    if (g != 0) {
      Integer rem;
      mpz_mod(rem.get_mpz_t(), c.get_num().get_mpz_t(), g.get_mpz_t());
      if (rem != 0) return std::nullopt;
    }
  }
  std::vector<LinConstraint> work = rows;
  long budget = node_budget;
  return ilp_rec(n_vars, work, budget);
}

std::optional<std::vector<Integer>> ilp_lex_least(int n_vars,
                                                  const std::vector<LinConstraint>& rows,
                                                  long node_budget) {
  auto base = ilp_point(n_vars, rows, node_budget);
  if (!base) return std::nullopt;

  std::vector<LinConstraint> fixed = rows;
  for (int j = 0; j < n_vars; ++j) {
    Integer lo = 0, hi = (*base)[j];
    LinConstraint cap;
    cap.a = zero_vec(n_vars);
    cap.a[j] = 1;
    cap.rel = LinRel::Le;
    while (lo < hi) {
      Integer mid = floor_div(lo + hi, 2);
      cap.c = Rational(mid);
      fixed.push_back(cap);
      auto s = ilp_point(n_vars, fixed, node_budget);
      fixed.pop_back();
      if (s) {
        base = s;
        hi = (*base)[j];
      } else {
        lo = mid + 1;
      }
    }
    cap.rel = LinRel::Eq;
    cap.c = Rational(hi);
    fixed.push_back(cap);
  }
  return base;
}

}  // namespace gnnv
