#include "gnnv/fixed_point.hpp"

#include <set>
#include <utility>

#include "gnnv/rational.hpp"

namespace gnnv {

namespace {

// Integer constants are kept well below the 64-bit range so that a handful of
// additions and one multiplication cannot wrap before the overflow checks.
constexpr long kConstLimit = 1L << 40;

bool fits(const Integer& z, long& out) {
  if (!z.fits_slong_p()) return false;
  out = z.get_si();
  return -kConstLimit < out && out < kConstLimit;
}

// q * scale, required to be an integer that fits.
bool scaled_long(const Rational& q, const Integer& scale, long& out) {
  Rational r = q * Rational(scale);
  r.canonicalize();
  if (r.get_den() != 1) return false;
  return fits(r.get_num(), out);
}

bool omul(long a, long b, long& r) { return !__builtin_mul_overflow(a, b, &r); }
bool oadd(long a, long b, long& r) { return !__builtin_add_overflow(a, b, &r); }

}  // namespace

std::optional<FixedPointGnn> FixedPointGnn::compile(const GnnSpec& gnn) {
  FixedPointGnn f;
  f.n_colors_ = gnn.n_colors;
  f.scales_.push_back(1);
  Integer scale = 1;
  bool ok = true;

  auto scaled_rows = [&ok](const Mat& m, const Integer& factor) {
    std::vector<Row> rows(m.size());
    for (std::size_t i = 0; i < m.size() && ok; ++i) {
      for (std::size_t j = 0; j < m[i].size() && ok; ++j) {
        if (m[i][j] == 0) continue;
        long c;
        ok = scaled_long(m[i][j], factor, c);
        if (ok) rows[i].e.push_back({(int)j, c});
      }
    }
    return rows;
  };
  auto row_columns = [](const std::vector<Row>& rows) {
    std::set<int> cols;
    for (const auto& r : rows) {
      for (const auto& [j, c] : r.e) cols.insert(j);
    }
    return std::vector<int>(cols.begin(), cols.end());
  };

  for (const Layer& layer : gnn.layers) {
    Integer actden = layer.act.coefficient_denominator();
    Integer cden = actden;
    auto absorb = [&](const Rational& q) { cden = lcm(cden, Integer(q.get_den())); };
    for (const Mat* m : {&layer.C, &layer.A_out, &layer.A_in, &layer.R}) {
      for (const auto& row : *m) {
        for (const auto& q : row) absorb(q);
      }
    }
    for (const auto& q : layer.b) absorb(q);

    Integer pre_scale = scale * cden;  // scale of the pre-activation values
    Lay lay;
    lay.dim = layer.dim;
    lay.b.resize(layer.dim);
    for (int i = 0; i < layer.dim && ok; ++i) ok = scaled_long(layer.b[i], pre_scale, lay.b[i]);
    lay.C = scaled_rows(layer.C, cden);
    lay.A_out = scaled_rows(layer.A_out, cden);
    lay.A_in = scaled_rows(layer.A_in, cden);
    lay.R = scaled_rows(layer.R, cden);
    lay.cols_out = row_columns(lay.A_out);
    lay.cols_in = row_columns(lay.A_in);
    lay.cols_global = row_columns(lay.R);
    for (const Piece& p : layer.act.pieces) {
      FPiece fp;
      if (p.upto) {
        fp.has_upto = true;
        if (ok) ok = scaled_long(*p.upto, pre_scale, fp.upto);
      }
      if (ok) ok = scaled_long(p.slope, actden, fp.slope);
      if (ok) ok = scaled_long(p.intercept, pre_scale * actden, fp.icept);
      lay.pieces.push_back(fp);
    }
    scale = pre_scale * actden;
    long scale_l;
    if (!ok || !fits(scale, scale_l)) return std::nullopt;
    f.scales_.push_back(scale_l);
    f.layers_.push_back(std::move(lay));
  }
  return f;
}

namespace {

bool add_row_terms(long& acc, const std::vector<std::pair<int, long>>& row,
                   const long* x) {
  for (const auto& [j, c] : row) {
    long t;
    if (!omul(c, x[j], t) || !oadd(acc, t, acc)) return false;
  }
  return true;
}

}  // namespace

std::optional<std::vector<char>> FixedPointGnn::run(
    const Graph& g, std::vector<std::vector<long>>* keep) const {
  std::vector<std::vector<int>> out_adj(g.n), in_adj(g.n);
  for (const auto& [u, v] : g.edges) {
    out_adj[u].push_back(v);
    in_adj[v].push_back(u);
  }
  auto apply_pieces = [](const std::vector<FPiece>& pieces, long p, long& out) {
    for (const auto& fp : pieces) {
      if (fp.has_upto && p >= fp.upto) continue;
      long t;
      return omul(fp.slope, p, t) && oadd(t, fp.icept, out);
    }
    return false;
  };

  int prev_dim = n_colors_;
  std::vector<long> cur((std::size_t)g.n * prev_dim, 0), nxt;
  for (int c = 0; c < n_colors_; ++c) {
    for (int v : g.colors[c]) cur[(std::size_t)v * prev_dim + c] = 1;
  }
  if (keep) keep->clear();

  std::vector<long> global_sum, out_sum, in_sum;
  for (const auto& lay : layers_) {
    global_sum.assign(prev_dim, 0);
    if (!lay.cols_global.empty()) {
      for (int v = 0; v < g.n; ++v) {
        for (int i : lay.cols_global) {
          if (!oadd(global_sum[i], cur[(std::size_t)v * prev_dim + i], global_sum[i]))
            return std::nullopt;
        }
      }
    }
    nxt.assign((std::size_t)g.n * lay.dim, 0);
    out_sum.assign(prev_dim, 0);
    in_sum.assign(prev_dim, 0);
    for (int v = 0; v < g.n; ++v) {
      if (!lay.cols_out.empty()) {
        for (int i : lay.cols_out) out_sum[i] = 0;
        for (int u : out_adj[v]) {
          for (int i : lay.cols_out) {
            if (!oadd(out_sum[i], cur[(std::size_t)u * prev_dim + i], out_sum[i]))
              return std::nullopt;
          }
        }
      }
      if (!lay.cols_in.empty()) {
        for (int i : lay.cols_in) in_sum[i] = 0;
        for (int u : in_adj[v]) {
          for (int i : lay.cols_in) {
            if (!oadd(in_sum[i], cur[(std::size_t)u * prev_dim + i], in_sum[i]))
              return std::nullopt;
          }
        }
      }
      const long* own = cur.data() + (std::size_t)v * prev_dim;
      for (int i = 0; i < lay.dim; ++i) {
        long pre = lay.b[i];
        if (!add_row_terms(pre, lay.C[i].e, own)) return std::nullopt;
        if (!lay.cols_out.empty() && !add_row_terms(pre, lay.A_out[i].e, out_sum.data()))
          return std::nullopt;
        if (!lay.cols_in.empty() && !add_row_terms(pre, lay.A_in[i].e, in_sum.data()))
          return std::nullopt;
        if (!lay.cols_global.empty() &&
            !add_row_terms(pre, lay.R[i].e, global_sum.data()))
          return std::nullopt;
        if (!apply_pieces(lay.pieces, pre, nxt[(std::size_t)v * lay.dim + i]))
          return std::nullopt;
      }
    }
    cur.swap(nxt);
    prev_dim = lay.dim;
    if (keep) keep->push_back(cur);
  }

  std::vector<char> acc(g.n, 0);
  long final_scale = scales_.back();
  for (int v = 0; v < g.n; ++v) {
    long doubled;
    if (!omul(cur[(std::size_t)v * prev_dim], 2, doubled)) return std::nullopt;
    acc[v] = doubled >= final_scale;
  }
  return acc;
}

std::optional<std::vector<char>> FixedPointGnn::accepted(const Graph& g) const {
  return run(g, nullptr);
}

std::optional<std::vector<std::vector<long>>> FixedPointGnn::features(
    const Graph& g) const {
  std::vector<std::vector<long>> out;
  if (!run(g, &out)) return std::nullopt;
  return out;
}

}  // namespace gnnv
