#include "gnnv/translate.hpp"

#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace gnnv {

namespace {

// Enumerates all index tuples of length dim over [0, base), lexicographically,
// matching SpectrumOverapprox::vectors. Returns false when exhausted.
bool next_tuple(std::vector<int>& idx, int base) {
  int i = (int)idx.size() - 1;
  while (i >= 0 && ++idx[i] == base) {
    idx[i] = 0;
    --i;
  }
  return i >= 0;
}

Mat zero_mat(int rows, int cols) { return Mat(rows, Vec(cols, Rational(0))); }

bool is_top(const FormulaPtr& f) { return f->op == Formula::Op::Top; }
bool is_bot(const FormulaPtr& f) { return f->op == Formula::Op::Not && is_top(f->left); }

// And/Or with constant operands removed; keeps translated formulas free of
// branches that can never (or always) hold.
FormulaPtr fold_and(std::vector<FormulaPtr> parts) {
  std::vector<FormulaPtr> kept;
  for (auto& p : parts) {
    if (is_bot(p)) return f_bot();
    if (!is_top(p)) kept.push_back(std::move(p));
  }
  return f_and(std::move(kept));
}

FormulaPtr fold_or(std::vector<FormulaPtr> parts) {
  std::vector<FormulaPtr> kept;
  for (auto& p : parts) {
    if (is_top(p)) return f_top();
    if (!is_bot(p)) kept.push_back(std::move(p));
  }
  return f_or(std::move(kept));
}

bool compare(const Rational& a, Cmp cmp, const Rational& b) {
  switch (cmp) {
    case Cmp::Ge: return a >= b;
    case Cmp::Le: return a <= b;
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return a != b;
    case Cmp::Gt: return a > b;
    case Cmp::Lt: return a < b;
  }
  return false;
}

Layer zero_layer(int out_dim, int in_dim, const Activation& act) {
  Layer l;
  l.dim = out_dim;
  l.act = act;
  l.C = zero_mat(out_dim, in_dim);
  l.A_out = zero_mat(out_dim, in_dim);
  l.A_in = zero_mat(out_dim, in_dim);
  l.R = zero_mat(out_dim, in_dim);
  l.b = zero_vec(out_dim);
  return l;
}

}  // namespace

FormulaPtr gnn_to_mp2(const GnnSpec& gnn, long size_cap) {
  gnn.validate();
  SpectrumOverapprox sp = overapprox_spectrum(gnn, size_cap);

  // Layer-0 formulas: one per 0/1 vector of color indicators.
  int d0 = gnn.n_colors;
  std::vector<FormulaPtr> prev;
  std::vector<Vec> prev_vecs = sp.vectors(0, d0);
  {
    std::vector<int> idx(d0, 0);
    do {
      std::vector<FormulaPtr> lits;
      for (int i = 0; i < d0; ++i) {
        lits.push_back(idx[i] == 1 ? f_color(i) : f_not(f_color(i)));
      }
      prev.push_back(f_and(std::move(lits)));
    } while (next_tuple(idx, 2));
  }

  long budget = size_cap;
  auto spend = [&](const Integer& amount) {
    if (amount > budget) throw ResourceLimitError("formula translation exceeds the size cap");
    budget -= amount.get_si();
  };

  for (int l = 1; l <= gnn.n_layers(); ++l) {
    const Layer& layer = gnn.layers[l - 1];
    int d = layer.dim;
    int prev_dim = gnn.dim(l - 1);
    // Grid denominator of the pre-activations: previous values over their
    // least common denominator combined with this layer's coefficients.
    Integer prev_lcd = 1;
    for (const auto& pv : prev_vecs) {
      for (const auto& q : pv) prev_lcd = lcm(prev_lcd, q.get_den());
    }
    Integer c = prev_lcd * layer_coefficient_denominator(layer);
    // One extra grid point per side represents all pre-activations beyond
    // the flat thresholds (Le on the first atom, Ge on the last).
    Integer k_lo = rational_ceil(Rational(c) * layer.act.left_threshold()) - 1;
    Integer k_hi = rational_floor(Rational(c) * layer.act.right_threshold()) + 1;
    long nk = Integer(k_hi - k_lo + 1).get_si();
    long np = (long)prev.size();

    Integer cur_count = sp.vector_count(l, d);
    spend(cur_count * np * (d + 2));

    // Value realized by each integer k, and the k's realizing each value.
    std::map<Rational, std::vector<long>> ks_of_value;
    std::vector<Rational> value_of_k(nk);
    for (long t = 0; t < nk; ++t) {
      Rational v = layer.act.apply(Rational(Integer(k_lo + t)) / Rational(c));
      value_of_k[t] = v;
      ks_of_value[v].push_back(t);
    }

    // Aggregation terms of entry i, independent of the vertex's own previous
    // vector; shared by every atom of the entry.
    std::vector<std::vector<PresTerm>> terms_of(d);
    for (int i = 0; i < d; ++i) {
      for (std::size_t q = 0; q < prev.size(); ++q) {
        const Vec& s2 = prev_vecs[q];
        struct GuardMat {
          const Mat* m;
          Guard g;
        };
        for (GuardMat gm : {GuardMat{&layer.A_out, Guard::Out},
                            GuardMat{&layer.A_in, Guard::In},
                            GuardMat{&layer.R, Guard::Top}}) {
          Rational lam = dot((*gm.m)[i], s2);
          if (lam != 0) terms_of[i].push_back({lam, gm.g, prev[q]});
        }
      }
    }

    // Quantifier stating that entry i of the pre-activation equals (or, at
    // the spectrum edges, is beyond) k/c. Two previous vectors with the same
    // own-contribution share the node.
    std::map<std::tuple<int, int, Rational>, FormulaPtr> atom_cache;
    auto atom = [&](int i, long t, const Rational& base) {
      Cmp cmp = t == 0 ? Cmp::Le : (t == nk - 1 ? Cmp::Ge : Cmp::Eq);
      Rational target = Rational(Integer(k_lo + t)) / Rational(c);
      if (terms_of[i].empty()) return compare(base, cmp, target) ? f_top() : f_bot();
      auto key = std::make_tuple(i, (int)cmp, target - base);
      auto it = atom_cache.find(key);
      if (it != atom_cache.end()) return it->second;
      spend(Integer(1 + (long)terms_of[i].size() / 4));
      FormulaPtr f = pres_two_sided(base, terms_of[i], cmp, target, {});
      atom_cache.emplace(key, f);
      return f;
    };

    // match[p][i][w]: entry i of the next feature equals vals[w], given the
    // vertex's own previous vector is prev_vecs[p].
    const auto& vals = sp.entry_values[l];
    long nv = (long)vals.size();
    spend(Integer(np) * d * nv);
    std::vector<std::vector<std::vector<FormulaPtr>>> match(
        np, std::vector<std::vector<FormulaPtr>>(d, std::vector<FormulaPtr>(nv)));
    for (long p = 0; p < np; ++p) {
      const Vec& s1 = prev_vecs[p];
      for (int i = 0; i < d; ++i) {
        Rational base = layer.b[i] + dot(layer.C[i], s1);
        for (long w = 0; w < nv; ++w) {
          std::vector<FormulaPtr> options;
          for (long t : ks_of_value.at(vals[w])) options.push_back(atom(i, t, base));
          match[p][i][w] = fold_or(std::move(options));
        }
      }
    }

    std::vector<FormulaPtr> cur;
    std::vector<Vec> cur_vecs = sp.vectors(l, d);
    std::vector<int> idx(d, 0);
    do {
      std::vector<FormulaPtr> branches;
      for (long p = 0; p < np; ++p) {
        std::vector<FormulaPtr> conj{prev[p]};
        for (int i = 0; i < d; ++i) conj.push_back(match[p][i][idx[i]]);
        branches.push_back(fold_and(std::move(conj)));
      }
      cur.push_back(fold_or(std::move(branches)));
    } while (next_tuple(idx, (int)nv));

    prev = std::move(cur);
    prev_vecs = std::move(cur_vecs);
  }

  // Accepting vectors: first entry at least 1/2.
  std::vector<FormulaPtr> accepting;
  for (std::size_t p = 0; p < prev.size(); ++p) {
    if (prev_vecs[p][0] >= Rational(1, 2)) accepting.push_back(prev[p]);
  }
  return fold_or(std::move(accepting));
}

int formula_color_count(const FormulaPtr& phi) {
  int n = 0;
  for (const FormulaPtr& sub : subformula_index(phi)) {
    if (sub->op == Formula::Op::Color) n = std::max(n, sub->color + 1);
  }
  return n;
}

GnnSpec mp2_to_trrelu_gnn(const FormulaPtr& phi, int min_colors) {
  FormulaPtr norm = normalize_ge(phi);
  std::vector<FormulaPtr> subs = subformula_index(norm);
  int L = (int)subs.size();
  std::unordered_map<std::string, int> index;
  for (int t = 0; t < L; ++t) index[formula_key(subs[t])] = t;
  auto idx_of = [&](const FormulaPtr& f) { return index.at(formula_key(f)); };

  int n = std::max({formula_color_count(norm), min_colors, 1});
  int D = L + n;

  GnnSpec gnn;
  gnn.n_colors = n;
  for (int l = 1; l <= L; ++l) {
    int in_dim = l == 1 ? n : D;
    Layer layer = zero_layer(D, in_dim, Activation::trrelu());

    // Already computed subformula entries keep their value.
    for (int t = 0; t + 1 < l; ++t) layer.C[t][t] = 1;
    // Color indicators are carried along in the top entries.
    for (int j = 0; j < n; ++j) layer.C[L + j][l == 1 ? j : L + j] = 1;

    const Formula& f = *subs[l - 1];
    int e = l - 1;
    switch (f.op) {
      case Formula::Op::Top:
        layer.b[e] = 1;
        break;
      case Formula::Op::Color:
        layer.C[e][l == 1 ? f.color : L + f.color] = 1;
        break;
      case Formula::Op::Not:
        layer.C[e][idx_of(f.left)] -= 1;
        layer.b[e] = 1;
        break;
      case Formula::Op::And:
        layer.C[e][idx_of(f.left)] += 1;
        layer.C[e][idx_of(f.right)] += 1;
        layer.b[e] = -1;
        break;
      case Formula::Op::Pres:
        for (const PresTerm& t : f.terms) {
          Mat& m = t.guard == Guard::Out ? layer.A_out
                   : t.guard == Guard::In ? layer.A_in
                                          : layer.R;
          m[e][idx_of(t.body)] += t.lambda;
        }
        layer.b[e] = Rational(1) - f.delta;
        break;
      case Formula::Op::TwoHop:
        throw std::invalid_argument("two-hop quantifiers need the ReLU translation");
    }
    gnn.layers.push_back(std::move(layer));
  }

  Layer out = zero_layer(1, D, Activation::trrelu());
  out.C[0][L - 1] = 1;
  gnn.layers.push_back(std::move(out));
  gnn.validate();
  return gnn;
}

GnnSpec m2p2_to_relu_gnn(const FormulaPtr& phi, int min_colors) {
  FormulaPtr norm = normalize_ge(phi);
  if (dialect_of(norm).uses_top_guard) {
    throw std::invalid_argument("global readout quantifiers are not supported here");
  }
  std::vector<FormulaPtr> subs = subformula_index(norm);
  int L = (int)subs.size();
  std::unordered_map<std::string, int> index;
  for (int t = 0; t < L; ++t) index[formula_key(subs[t])] = t;
  auto idx_of = [&](const FormulaPtr& f) { return index.at(formula_key(f)); };

  int K = 0;
  for (const FormulaPtr& s : subs) {
    if (s->op == Formula::Op::TwoHop) K = std::max(K, (int)s->two_hop.size());
  }
  int n = std::max({formula_color_count(norm), min_colors, 1});
  int D = L + K + n;

  GnnSpec gnn;
  gnn.n_colors = n;
  for (int m = 1; m <= 3 * L; ++m) {
    int l = (m + 2) / 3;      // subformula being processed
    int phase = (m - 1) % 3;  // 0: two-hop scratch, 1: raw value, 2: finished entry
    int in_dim = m == 1 ? n : D;
    Layer layer = zero_layer(D, in_dim, Activation::relu());

    for (int t = 0; t < L; ++t) {
      if (3 * (t + 1) < m) layer.C[t][t] = 1;
    }
    for (int j = 0; j < n; ++j) layer.C[L + K + j][m == 1 ? j : L + K + j] = 1;

    const Formula& f = *subs[l - 1];
    int e = l - 1;
    switch (phase) {
      case 0:
        // Second-hop sums, evaluated at the intermediate vertex.
        if (f.op == Formula::Op::TwoHop) {
          for (std::size_t r = 0; r < f.two_hop.size(); ++r) {
            const TwoHopTerm& t = f.two_hop[r];
            (t.hop2_out ? layer.A_out : layer.A_in)[L + (int)r][idx_of(t.body)] = 1;
          }
        }
        break;
      case 1:
        switch (f.op) {
          case Formula::Op::Top:
            layer.b[e] = 1;
            break;
          case Formula::Op::Color:
            layer.C[e][L + K + f.color] = 1;
            break;
          case Formula::Op::Not:
            layer.C[e][idx_of(f.left)] = 1;
            break;
          case Formula::Op::And:
            layer.C[e][idx_of(f.left)] += 1;
            layer.C[e][idx_of(f.right)] += 1;
            layer.b[e] = -1;
            break;
          case Formula::Op::Pres:
            // relu(delta - value); zero exactly when the quantifier holds.
            for (const PresTerm& t : f.terms) {
              (t.guard == Guard::Out ? layer.A_out : layer.A_in)[e][idx_of(t.body)] -=
                  t.lambda;
            }
            layer.b[e] = f.delta;
            break;
          case Formula::Op::TwoHop:
            for (std::size_t r = 0; r < f.two_hop.size(); ++r) {
              const TwoHopTerm& t = f.two_hop[r];
              (t.hop1_out ? layer.A_out : layer.A_in)[e][L + (int)r] -= t.lambda;
            }
            for (const PresTerm& t : f.one_hop) {
              (t.guard == Guard::Out ? layer.A_out : layer.A_in)[e][idx_of(t.body)] -=
                  t.lambda;
            }
            layer.b[e] = f.delta;
            break;
        }
        break;
      case 2:
        switch (f.op) {
          case Formula::Op::Top:
          case Formula::Op::Color:
          case Formula::Op::And:
            layer.C[e][e] = 1;
            break;
          case Formula::Op::Not:
          case Formula::Op::Pres:
          case Formula::Op::TwoHop:
            layer.C[e][e] = -1;
            layer.b[e] = 1;
            break;
        }
        break;
    }
    gnn.layers.push_back(std::move(layer));
  }

  Layer out = zero_layer(1, D, Activation::relu());
  out.C[0][L - 1] = 1;
  gnn.layers.push_back(std::move(out));
  gnn.validate();
  return gnn;
}

}  // namespace gnnv
