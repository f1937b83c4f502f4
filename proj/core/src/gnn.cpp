#include "gnnv/gnn.hpp"

#include <stdexcept>

namespace gnnv {

namespace {

bool all_zero(const Mat& m) {
  for (const auto& row : m) {
    for (const auto& q : row) {
      if (q != 0) return false;
    }
  }
  return true;
}

void check_shape(const Mat& m, int rows, int cols, const char* name) {
  if ((int)m.size() != rows) throw std::invalid_argument(std::string(name) + ": bad row count");
  for (const auto& row : m) {
    if ((int)row.size() != cols) throw std::invalid_argument(std::string(name) + ": bad column count");
  }
}

}  // namespace

bool GnnSpec::local() const {
  for (const auto& l : layers) {
    if (!all_zero(l.R)) return false;
  }
  return true;
}

bool GnnSpec::outgoing_only() const {
  for (const auto& l : layers) {
    if (!all_zero(l.A_in)) return false;
  }
  return true;
}

bool GnnSpec::all_trrelu() const {
  for (const auto& l : layers) {
    if (!l.act.is_trrelu()) return false;
  }
  return true;
}

void GnnSpec::validate() const {
  if (n_colors < 1) throw std::invalid_argument("n_colors must be positive");
  if (layers.empty()) throw std::invalid_argument("at least one layer required");
  for (int l = 1; l <= n_layers(); ++l) {
    const Layer& layer = layers[l - 1];
    if (layer.dim < 1) throw std::invalid_argument("layer dimension must be positive");
    layer.act.validate();
    check_shape(layer.C, layer.dim, dim(l - 1), "C");
    check_shape(layer.A_out, layer.dim, dim(l - 1), "A_out");
    check_shape(layer.A_in, layer.dim, dim(l - 1), "A_in");
    check_shape(layer.R, layer.dim, dim(l - 1), "R");
    if ((int)layer.b.size() != layer.dim) throw std::invalid_argument("b: bad size");
  }
}

FeatureTable forward(const GnnSpec& gnn, const Graph& g) {
  if (gnn.n_colors != g.n_colors) {
    throw std::invalid_argument("forward: color count mismatch between GNN and graph");
  }
  FeatureTable table(gnn.n_layers() + 1);
  table[0].assign(g.n, zero_vec(gnn.n_colors));
  for (int c = 0; c < g.n_colors; ++c) {
    for (int v : g.colors[c]) table[0][v][c] = 1;
  }

  // Precompute adjacency once; in_neighbors is quadratic per call.
  std::vector<std::vector<int>> out_adj(g.n), in_adj(g.n);
  for (const auto& [u, v] : g.edges) {
    out_adj[u].push_back(v);
    in_adj[v].push_back(u);
  }

  for (int l = 1; l <= gnn.n_layers(); ++l) {
    const Layer& layer = gnn.layers[l - 1];
    const auto& prev = table[l - 1];

    Vec global_sum = zero_vec(gnn.dim(l - 1));
    for (int v = 0; v < g.n; ++v) {
      for (std::size_t i = 0; i < global_sum.size(); ++i) global_sum[i] += prev[v][i];
    }

    table[l].assign(g.n, zero_vec(layer.dim));
    for (int v = 0; v < g.n; ++v) {
      Vec out_sum = zero_vec(gnn.dim(l - 1));
      for (int u : out_adj[v]) {
        for (std::size_t i = 0; i < out_sum.size(); ++i) out_sum[i] += prev[u][i];
      }
      Vec in_sum = zero_vec(gnn.dim(l - 1));
      for (int u : in_adj[v]) {
        for (std::size_t i = 0; i < in_sum.size(); ++i) in_sum[i] += prev[u][i];
      }

      Vec pre = layer.b;
      add_mat_vec(pre, layer.C, prev[v]);
      add_mat_vec(pre, layer.A_out, out_sum);
      add_mat_vec(pre, layer.A_in, in_sum);
      add_mat_vec(pre, layer.R, global_sum);
      for (int i = 0; i < layer.dim; ++i) table[l][v][i] = layer.act.apply(pre[i]);
    }
  }
  return table;
}

namespace {

std::vector<ForwardPlan::SparseRow> sparse_rows(const Mat& m) {
  std::vector<ForwardPlan::SparseRow> rows(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      if (m[i][j] != 0) rows[i].entries.push_back({(int)j, m[i][j]});
    }
  }
  return rows;
}

std::vector<int> used_columns(const std::vector<ForwardPlan::SparseRow>& rows) {
  std::set<int> cols;
  for (const auto& r : rows) {
    for (const auto& [j, q] : r.entries) cols.insert(j);
  }
  return {cols.begin(), cols.end()};
}

void add_sparse(Vec& out, const std::vector<ForwardPlan::SparseRow>& rows, const Vec& x) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, q] : rows[i].entries) out[i] += q * x[j];
  }
}

}  // namespace

ForwardPlan make_forward_plan(const GnnSpec& gnn) {
  ForwardPlan plan;
  plan.n_colors = gnn.n_colors;
  for (const Layer& l : gnn.layers) {
    ForwardPlan::LayerPlan lp;
    lp.dim = l.dim;
    lp.act = l.act;
    lp.b = l.b;
    lp.C = sparse_rows(l.C);
    lp.A_out = sparse_rows(l.A_out);
    lp.A_in = sparse_rows(l.A_in);
    lp.R = sparse_rows(l.R);
    lp.cols_out = used_columns(lp.A_out);
    lp.cols_in = used_columns(lp.A_in);
    lp.cols_global = used_columns(lp.R);
    lp.any_out = !lp.cols_out.empty();
    lp.any_in = !lp.cols_in.empty();
    lp.any_global = !lp.cols_global.empty();
    plan.layers.push_back(std::move(lp));
  }
  return plan;
}

FeatureTable forward(const ForwardPlan& plan, const Graph& g) {
  if (plan.n_colors != g.n_colors) {
    throw std::invalid_argument("forward: color count mismatch between GNN and graph");
  }
  FeatureTable table(plan.layers.size() + 1);
  table[0].assign(g.n, zero_vec(plan.n_colors));
  for (int c = 0; c < g.n_colors; ++c) {
    for (int v : g.colors[c]) table[0][v][c] = 1;
  }

  std::vector<std::vector<int>> out_adj(g.n), in_adj(g.n);
  for (const auto& [u, v] : g.edges) {
    out_adj[u].push_back(v);
    in_adj[v].push_back(u);
  }

  for (std::size_t l = 1; l <= plan.layers.size(); ++l) {
    const auto& lp = plan.layers[l - 1];
    const auto& prev = table[l - 1];
    std::size_t prev_dim = prev[0].size();

    Vec global_sum;
    if (lp.any_global) {
      global_sum = zero_vec(prev_dim);
      for (int v = 0; v < g.n; ++v) {
        for (int i : lp.cols_global) global_sum[i] += prev[v][i];
      }
    }

    table[l].assign(g.n, zero_vec(lp.dim));
    Vec out_sum = zero_vec(prev_dim), in_sum = zero_vec(prev_dim);
    for (int v = 0; v < g.n; ++v) {
      Vec pre = lp.b;
      add_sparse(pre, lp.C, prev[v]);
      if (lp.any_out) {
        for (int i : lp.cols_out) out_sum[i] = 0;
        for (int u : out_adj[v]) {
          for (int i : lp.cols_out) out_sum[i] += prev[u][i];
        }
        add_sparse(pre, lp.A_out, out_sum);
      }
      if (lp.any_in) {
        for (int i : lp.cols_in) in_sum[i] = 0;
        for (int u : in_adj[v]) {
          for (int i : lp.cols_in) in_sum[i] += prev[u][i];
        }
        add_sparse(pre, lp.A_in, in_sum);
      }
      if (lp.any_global) add_sparse(pre, lp.R, global_sum);
      for (int i = 0; i < lp.dim; ++i) table[l][v][i] = lp.act.apply(pre[i]);
    }
  }
  return table;
}

bool accepts_feature(const Vec& last_feature) {
  return last_feature.at(0) >= Rational(1, 2);
}

bool accepts(const GnnSpec& gnn, const Graph& g, int v) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("accepts: invalid vertex id");
  FeatureTable t = forward(gnn, g);
  return accepts_feature(t.back()[v]);
}

History history_from_table(const FeatureTable& t, int v, int l) {
  if (l < 0 || l >= (int)t.size()) throw std::out_of_range("history: layer index out of range");
  History h;
  for (int i = 0; i <= l; ++i) h.entries.push_back(t[i][v]);
  return h;
}

History history(const GnnSpec& gnn, const Graph& g, int v, int l) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("history: invalid vertex id");
  return history_from_table(forward(gnn, g), v, l);
}

History history_sum(const std::vector<History>& hs, const GnnSpec& gnn, int depth) {
  History sum;
  for (int t = 0; t <= depth; ++t) sum.entries.push_back(zero_vec(gnn.dim(t)));
  for (const auto& h : hs) {
    if (h.depth() < depth) throw std::invalid_argument("history_sum: history too shallow");
    for (int t = 0; t <= depth; ++t) {
      for (std::size_t i = 0; i < sum.entries[t].size(); ++i) {
        sum.entries[t][i] += h.entries[t][i];
      }
    }
  }
  return sum;
}

History history_step(const GnnSpec& gnn, const Vec& initial, const History& out_sum,
                     const History& in_sum, const History& global_sum, int l) {
  if (l < 0 || l > gnn.n_layers()) throw std::out_of_range("history_step: bad layer index");
  if ((int)initial.size() != gnn.n_colors) {
    throw std::invalid_argument("history_step: initial feature has wrong dimension");
  }
  if (l > 0) {
    for (const History* s : {&out_sum, &in_sum, &global_sum}) {
      if (s->depth() < l - 1) throw std::invalid_argument("history_step: summed history too shallow");
      for (int t = 0; t < l; ++t) {
        if ((int)s->entries[t].size() != gnn.dim(t)) {
          throw std::invalid_argument("history_step: summed history dimension mismatch");
        }
      }
    }
  }

  History h;
  h.entries.push_back(initial);
  for (int t = 1; t <= l; ++t) {
    const Layer& layer = gnn.layers[t - 1];
    Vec pre = layer.b;
    add_mat_vec(pre, layer.C, h.entries[t - 1]);
    add_mat_vec(pre, layer.A_out, out_sum.entries[t - 1]);
    add_mat_vec(pre, layer.A_in, in_sum.entries[t - 1]);
    add_mat_vec(pre, layer.R, global_sum.entries[t - 1]);
    Vec feat(layer.dim);
    for (int i = 0; i < layer.dim; ++i) feat[i] = layer.act.apply(pre[i]);
    h.entries.push_back(std::move(feat));
  }
  return h;
}

}  // namespace gnnv
