#include "gnnv/sat_local.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <stdexcept>

#include "gnnv/oracle.hpp"
#include "gnnv/translate.hpp"

namespace gnnv {

std::pair<Graph, int> unravel(const Graph& g, int v, int depth) {
  if (v < 0 || v >= g.n) throw std::invalid_argument("vertex out of range");
  Graph tree(g.n_colors, 0);
  tree.n = 0;

  struct Node {
    int dest;
    int prev;  // destination of the previous step, -1 at the root
    int dir;   // 0 root, 1 arrived forward (edge prev->dest), 2 backward
    int len;
  };
  std::vector<Node> nodes;

  auto add_vertex = [&](int dest, int prev, int dir, int len) {
    int id = tree.n++;
    nodes.push_back({dest, prev, dir, len});
    for (int c = 0; c < g.n_colors; ++c) {
      if (g.has_color(c, dest)) tree.colors[c].insert(id);
    }
    return id;
  };

  add_vertex(v, -1, 0, 0);
  for (int id = 0; id < tree.n; ++id) {
    Node cur = nodes[id];
    if (cur.len == depth) continue;
    // A step is improper only when it re-traverses the edge just used.
    for (int w : g.out_neighbors(cur.dest)) {
      if (w == cur.prev && cur.dir == 2) continue;
      int nv = add_vertex(w, cur.dest, 1, cur.len + 1);
      tree.add_edge(id, nv);
    }
    for (int w : g.in_neighbors(cur.dest)) {
      if (w == cur.prev && cur.dir == 1) continue;
      int nv = add_vertex(w, cur.dest, 2, cur.len + 1);
      tree.add_edge(nv, id);
    }
  }
  return {tree, 0};
}

bool unravelling_preserves_history(const GnnSpec& gnn, const Graph& g, int v) {
  int L = gnn.n_layers();
  auto [tree, root] = unravel(g, v, L);
  return history(gnn, tree, root, L) == history(gnn, g, v, L);
}

CharSystem char_system(const GnnSpec& gnn, const History& node_history, int depth,
                       const std::optional<ParentLink>& parent,
                       const std::vector<History>& out_candidates,
                       const std::vector<History>& in_candidates) {
  int L = gnn.n_layers();
  int T = L - depth;
  if (node_history.depth() != T) throw std::invalid_argument("node history has wrong depth");
  if (parent && parent->parent.depth() != T + 1) {
    throw std::invalid_argument("parent history has wrong depth");
  }
  for (const auto* cands : {&out_candidates, &in_candidates}) {
    for (const History& h : *cands) {
      if (h.depth() != T - 1) throw std::invalid_argument("candidate history has wrong depth");
    }
  }

  CharSystem sys;
  sys.n_out = (int)out_candidates.size();
  sys.n_in = (int)in_candidates.size();
  Rational d_common(common_coefficient_denominator(gnn));

  for (int t = 1; t <= T; ++t) {
    const Layer& lay = gnn.layers[t - 1];
    Vec base = lay.b;
    add_mat_vec(base, lay.C, node_history.entries[t - 1]);
    if (parent) {
      add_mat_vec(base, parent->edge_to_parent ? lay.A_out : lay.A_in,
                  parent->parent.entries[t - 1]);
    }
    for (int i = 0; i < lay.dim; ++i) {
      CharConstraint row;
      std::vector<Rational> coeffs;
      for (const History& h : out_candidates) coeffs.push_back(dot(lay.A_out[i], h.entries[t - 1]));
      for (const History& h : in_candidates) coeffs.push_back(dot(lay.A_in[i], h.entries[t - 1]));

      Rational value = node_history.entries[t][i];
      row.rel = value == 1 ? LinRel::Ge : (value == 0 ? LinRel::Le : LinRel::Eq);

      // Multiply through by the common denominator, then clear whatever
      // denominators remain from the history entries themselves.
      Integer scale = 1;
      for (auto& q : coeffs) {
        q *= d_common;
        scale = lcm(scale, q.get_den());
      }
      Rational constant = base[i] * d_common;
      Rational rhs = value * d_common;
      scale = lcm(scale, constant.get_den());
      scale = lcm(scale, rhs.get_den());
      Rational s{scale};
      for (const auto& q : coeffs) row.coeffs.push_back(Rational(q * s).get_num());
      row.constant = Rational(constant * s).get_num();
      row.rhs = Rational(rhs * s).get_num();
      sys.rows.push_back(std::move(row));
    }
  }
  return sys;
}

namespace {

std::vector<LinConstraint> char_rows(const CharSystem& sys) {
  std::vector<LinConstraint> rows;
  for (const auto& r : sys.rows) {
    LinConstraint c;
    c.a.reserve(r.coeffs.size());
    for (const auto& q : r.coeffs) c.a.push_back(Rational(q));
    c.rel = r.rel;
    c.c = Rational(r.rhs - r.constant);
    rows.push_back(std::move(c));
  }
  return rows;
}

}  // namespace

std::optional<std::vector<Integer>> ilp_feasible(const CharSystem& sys, long node_budget) {
  return ilp_lex_least(sys.n_vars(), char_rows(sys), node_budget);
}

SmallSolutionBounds small_solution_bounds(const GnnSpec& gnn) {
  GnnConstants k = gnn_constants(gnn);
  Integer d(k.total_dim);
  Integer m = k.coeff_magnitude;
  SmallSolutionBounds b;
  // alpha = 2 d log2(4 d m), beta = 2 d (d m)^{4 d}, the classical support
  // and magnitude bounds with conservative constants.
  b.alpha = 2 * d * (long)mpz_sizeinbase(Integer(4 * d * m).get_mpz_t(), 2);
  Integer base = d * m;
  Integer pow;
  mpz_pow_ui(pow.get_mpz_t(), base.get_mpz_t(), (unsigned long)(4 * k.total_dim));
  b.beta = 2 * d * pow;
  return b;
}

bool verify_witness(const GnnSpec& gnn, const TreeWitness& w) {
  const Graph& t = w.tree;
  // A tree after dropping direction: n-1 edges and connected.
  std::set<std::pair<int, int>> und;
  for (auto [a, b] : t.edges) und.insert({std::min(a, b), std::max(a, b)});
  if ((int)und.size() != t.n - 1) return false;
  std::vector<char> seen(t.n, 0);
  std::deque<int> q{w.root};
  seen[w.root] = 1;
  int reached = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (auto [a, b] : und) {
      int other = a == v ? b : (b == v ? a : -1);
      if (other >= 0 && !seen[other]) {
        seen[other] = 1;
        ++reached;
        q.push_back(other);
      }
    }
  }
  if (reached != t.n) return false;

  if (!accepts(gnn, t, w.root)) return false;
  if (!w.histories.empty()) {
    if ((int)w.histories.size() != t.n) return false;
    FeatureTable ft = forward(gnn, t);
    for (int v = 0; v < t.n; ++v) {
      if (history_from_table(ft, v, w.histories[v].depth()) != w.histories[v]) return false;
    }
  }
  return true;
}

namespace {

struct Decider {
  const GnnSpec& gnn;
  const SatCaps& caps;
  int L;
  SpectrumOverapprox sp;
  std::vector<std::vector<History>> space;  // space[m]: depth-m histories
  SatStats stats;

  struct Entry {
    bool ok = false;
    // (direction 0 out / 1 in, child index in space[m-1], multiplicity)
    std::vector<std::array<long, 3>> children;
  };
  std::map<std::array<long, 4>, Entry> memo;

  Decider(const GnnSpec& g, const SatCaps& c) : gnn(g), caps(c), L(g.n_layers()) {
    sp = overapprox_spectrum(gnn, caps.spectrum_cap);
    space.resize(L + 1);
    Integer count = 1;
    for (int m = 0; m <= L; ++m) {
      if (m == 0) {
        for (const Vec& v : sp.vectors(0, gnn.n_colors)) space[0].push_back(History{{v}});
        count = (long)space[0].size();
      } else {
        count *= sp.vector_count(m, gnn.dim(m));
        if (count > caps.history_cap) {
          throw ResourceLimitError("history space at depth " + std::to_string(m) +
                                   " exceeds the cap");
        }
        std::vector<Vec> vecs = sp.vectors(m, gnn.dim(m));
        for (const History& h : space[m - 1]) {
          for (const Vec& v : vecs) {
            History e = h;
            e.entries.push_back(v);
            space[m].push_back(std::move(e));
          }
        }
      }
      stats.histories += (long)space[m].size();
    }
  }

  // direction: 0 root, 1 out-child (edge parent->node), 2 in-child.
  const Entry& check(int ell, int dir, long hp_idx, long h_idx) {
    ++stats.check_calls;
    std::array<long, 4> key{ell, dir, hp_idx, h_idx};
    if (caps.memoize) {
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
    }

    Entry e;
    int m = L - ell;
    if (ell == L) {
      e.ok = true;
      return memo[key] = e;
    }

    std::vector<History> out_c, in_c;
    std::vector<long> out_idx, in_idx;
    for (long c = 0; c < (long)space[m - 1].size(); ++c) {
      if (check(ell + 1, 1, h_idx, c).ok) {
        out_c.push_back(space[m - 1][c]);
        out_idx.push_back(c);
      }
      if (check(ell + 1, 2, h_idx, c).ok) {
        in_c.push_back(space[m - 1][c]);
        in_idx.push_back(c);
      }
    }

    std::optional<ParentLink> link;
    if (dir == 1) link = ParentLink{false, space[m + 1][hp_idx]};
    if (dir == 2) link = ParentLink{true, space[m + 1][hp_idx]};

    CharSystem sys = char_system(gnn, space[m][h_idx], ell, link, out_c, in_c);
    ++stats.ilp_calls;
    auto sol = ilp_point(sys.n_vars(), char_rows(sys), caps.ilp_node_budget);
    if (sol) {
      e.ok = true;
      for (int j = 0; j < sys.n_out; ++j) {
        if ((*sol)[j] != 0) e.children.push_back({0, out_idx[j], (*sol)[j].get_si()});
      }
      for (int j = 0; j < sys.n_in; ++j) {
        if ((*sol)[sys.n_out + j] != 0) e.children.push_back({1, in_idx[j], (*sol)[sys.n_out + j].get_si()});
      }
    }
    return memo[key] = e;
  }

  int build(int ell, int dir, long hp_idx, long h_idx, Graph& tree,
            std::vector<History>& hists) {
    if (tree.n > caps.witness_vertex_cap) {
      throw ResourceLimitError("witness exceeds the vertex cap");
    }
    const Entry& e = memo.at({ell, dir, hp_idx, h_idx});
    int m = L - ell;
    const History& h = space[m][h_idx];
    int id = tree.n++;
    for (int c = 0; c < gnn.n_colors; ++c) {
      if (h.entries[0][c] == 1) tree.colors[c].insert(id);
    }
    hists.push_back(h);
    for (const auto& [cdir, c_idx, mult] : e.children) {
      for (long r = 0; r < mult; ++r) {
        int child = build(ell + 1, cdir == 0 ? 1 : 2, h_idx, c_idx, tree, hists);
        if (cdir == 0) {
          tree.add_edge(id, child);
        } else {
          tree.add_edge(child, id);
        }
      }
    }
    return id;
  }
};

}  // namespace

Verdict decide_sat(const GnnSpec& gnn, const SatCaps& caps) {
  gnn.validate();
  if (!gnn.local()) throw std::invalid_argument("decide_sat needs a local GNN");
  if (!gnn.all_trrelu()) throw std::invalid_argument("decide_sat needs truncated-ReLU layers");

  Verdict v;
  try {
    Decider d(gnn, caps);
    int L = d.L;
    for (long h = 0; h < (long)d.space[L].size(); ++h) {
      if (d.space[L][h].entries[L][0] < Rational(1, 2)) continue;
      if (!d.check(0, 0, -1, h).ok) continue;
      TreeWitness w;
      w.tree = Graph(gnn.n_colors, 1);
      w.tree.n = 0;
      w.root = 0;
      d.build(0, 0, -1, h, w.tree, w.histories);
      v.kind = Verdict::Kind::Sat;
      v.witness = std::move(w);
      v.stats = d.stats;
      return v;
    }
    v.kind = Verdict::Kind::Unsat;
    v.stats = d.stats;
  } catch (const ResourceLimitError& e) {
    v.kind = Verdict::Kind::ResourceLimit;
    v.reason = e.what();
  }
  return v;
}

Verdict decide_sat_eventually_constant(const GnnSpec& gnn, const SatCaps& caps) {
  gnn.validate();
  if (!gnn.local()) throw std::invalid_argument("a local GNN is required");
  Verdict v;

  // Sound shortcut: a small accepted model unravels into a tree witness,
  // because local networks cannot tell a vertex from the root of its
  // unravelling. Only Unsat has to pay for the translation pipeline.
  {
    EnumConfig cfg;
    cfg.n_colors = gnn.n_colors;
    cfg.max_vertices = 4;
    auto brute = brute_sat(gnn, cfg);
    if (brute.found) {
      auto [tree, root] = unravel(brute.graph, brute.vertex, gnn.n_layers());
      TreeWitness w;
      w.tree = std::move(tree);
      w.root = root;
      v.kind = Verdict::Kind::Sat;
      v.witness = std::move(w);
    }
  }

  if (v.kind != Verdict::Kind::Sat) {
    GnnSpec translated;
    try {
      FormulaPtr phi = gnn_to_mp2(gnn, caps.spectrum_cap);
      if ((long)subformula_index(phi).size() > caps.translation_node_cap) {
        throw ResourceLimitError("translated formula too large for the dense network route");
      }
      translated = mp2_to_trrelu_gnn(phi, gnn.n_colors);
    } catch (const ResourceLimitError& e) {
      v.kind = Verdict::Kind::ResourceLimit;
      v.reason = e.what();
      return v;
    }
    v = decide_sat(translated, caps);
  }
  if (v.kind == Verdict::Kind::Sat) {
    // Witness histories refer to the translated network (or are absent from
    // the shortcut); re-verify and re-record them against the original one.
    TreeWitness& w = *v.witness;
    if (!accepts(gnn, w.tree, w.root)) {
      throw std::logic_error("translated witness rejected by the original GNN");
    }
    FeatureTable ft = forward(gnn, w.tree);
    std::vector<int> depth(w.tree.n, -1);
    depth[w.root] = 0;
    std::deque<int> q{w.root};
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (auto [a, b] : w.tree.edges) {
        int other = a == x ? b : (b == x ? a : -1);
        if (other >= 0 && depth[other] < 0) {
          depth[other] = depth[x] + 1;
          q.push_back(other);
        }
      }
    }
    int L = gnn.n_layers();
    w.histories.clear();
    for (int x = 0; x < w.tree.n; ++x) {
      w.histories.push_back(history_from_table(ft, x, std::max(L - depth[x], 0)));
    }
  }
  return v;
}

namespace {

struct MinTree {
  const GnnSpec& gnn;
  Graph tree;
  int root;
  std::vector<int> depth;
  std::vector<int> parent;
  std::vector<char> edge_to_parent;  // vertex -> parent orientation
  std::vector<std::vector<int>> out_children, in_children;

  MinTree(const GnnSpec& g, const Graph& t, int r) : gnn(g), tree(t), root(r) { refresh(); }

  void refresh() {
    int n = tree.n;
    depth.assign(n, -1);
    parent.assign(n, -1);
    edge_to_parent.assign(n, 0);
    out_children.assign(n, {});
    in_children.assign(n, {});
    depth[root] = 0;
    std::deque<int> q{root};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (auto [a, b] : tree.edges) {
        int other = a == v ? b : (b == v ? a : -1);
        if (other < 0 || depth[other] >= 0) continue;
        depth[other] = depth[v] + 1;
        parent[other] = v;
        if (a == v) {
          out_children[v].push_back(other);
          edge_to_parent[other] = 0;
        } else {
          in_children[v].push_back(other);
          edge_to_parent[other] = 1;
        }
        q.push_back(other);
      }
    }
  }

  int copy_subtree(int src, Graph& dst, int skip_children_of,
                   const std::vector<std::pair<std::pair<int, int>, long>>& replacement) {
    int id = dst.n++;
    dst.colors.resize(gnn.n_colors);
    for (int c = 0; c < gnn.n_colors; ++c) {
      if (tree.has_color(c, src)) dst.colors[c].insert(id);
    }
    if (src == skip_children_of) {
      // (direction, representative child) with a multiplicity each.
      for (const auto& [key, mult] : replacement) {
        auto [dir, rep] = key;
        for (long r = 0; r < mult; ++r) {
          int child = copy_subtree(rep, dst, -1, replacement);
          if (dir == 0) {
            dst.add_edge(id, child);
          } else {
            dst.add_edge(child, id);
          }
        }
      }
      return id;
    }
    for (int c : out_children[src]) {
      int child = copy_subtree(c, dst, skip_children_of, replacement);
      dst.add_edge(id, child);
    }
    for (int c : in_children[src]) {
      int child = copy_subtree(c, dst, skip_children_of, replacement);
      dst.add_edge(child, id);
    }
    return id;
  }
};

}  // namespace

TreeWitness minimize_witness(const GnnSpec& gnn, const TreeWitness& w, long node_budget) {
  SmallSolutionBounds bounds = small_solution_bounds(gnn);
  int L = gnn.n_layers();
  MinTree mt(gnn, w.tree, w.root);

  while (true) {
    FeatureTable ft = forward(gnn, mt.tree);
    // Deepest vertex violating the degree bounds, smallest id on ties.
    int bad = -1;
    std::map<History, std::vector<int>> bad_out, bad_in;
    for (int v = 0; v < mt.tree.n; ++v) {
      int hd = L - mt.depth[v] - 1;
      if (hd < 0) continue;
      std::map<History, std::vector<int>> go, gi;
      for (int c : mt.out_children[v]) go[history_from_table(ft, c, hd)].push_back(c);
      for (int c : mt.in_children[v]) gi[history_from_table(ft, c, hd)].push_back(c);
      bool is_bad = false;
      for (const auto* g : {&go, &gi}) {
        if ((Integer)(long)g->size() > bounds.alpha) is_bad = true;
        for (const auto& [h, cs] : *g) {
          if ((Integer)(long)cs.size() > bounds.beta) is_bad = true;
        }
      }
      if (is_bad && (bad < 0 || mt.depth[v] > mt.depth[bad])) {
        bad = v;
        bad_out = go;
        bad_in = gi;
      }
    }
    if (bad < 0) break;

    std::vector<History> out_c, in_c;
    std::vector<int> out_rep, in_rep;
    for (const auto& [h, cs] : bad_out) {
      out_c.push_back(h);
      out_rep.push_back(cs.front());
    }
    for (const auto& [h, cs] : bad_in) {
      in_c.push_back(h);
      in_rep.push_back(cs.front());
    }
    std::optional<ParentLink> link;
    if (bad != mt.root) {
      link = ParentLink{mt.edge_to_parent[bad] != 0,
                        history_from_table(ft, mt.parent[bad], L - mt.depth[bad] + 1)};
    }
    CharSystem sys = char_system(gnn, history_from_table(ft, bad, L - mt.depth[bad]),
                                 mt.depth[bad], link, out_c, in_c);
    std::vector<LinConstraint> rows = char_rows(sys);
    for (int j = 0; j < sys.n_vars(); ++j) {
      LinConstraint cap;
      cap.a = zero_vec(sys.n_vars());
      cap.a[j] = 1;
      cap.rel = LinRel::Le;
      cap.c = Rational(bounds.beta);
      rows.push_back(std::move(cap));
    }
    auto sol = ilp_lex_least(sys.n_vars(), rows, node_budget);
    if (!sol) throw std::logic_error("characteristic system of a witness vertex infeasible");

    std::vector<std::pair<std::pair<int, int>, long>> replacement;
    for (int j = 0; j < sys.n_out; ++j) {
      if ((*sol)[j] != 0) replacement.push_back({{0, out_rep[j]}, (*sol)[j].get_si()});
    }
    for (int j = 0; j < sys.n_in; ++j) {
      if ((*sol)[sys.n_out + j] != 0) {
        replacement.push_back({{1, in_rep[j]}, (*sol)[sys.n_out + j].get_si()});
      }
    }

    Graph next(gnn.n_colors, 0);
    next.n = 0;
    mt.copy_subtree(mt.root, next, bad, replacement);
    mt.tree = std::move(next);
    mt.root = 0;
    mt.refresh();
  }

  TreeWitness out;
  out.tree = mt.tree;
  out.root = mt.root;
  FeatureTable ft = forward(gnn, out.tree);
  for (int v = 0; v < out.tree.n; ++v) {
    out.histories.push_back(history_from_table(ft, v, std::max(L - mt.depth[v], 0)));
  }
  return out;
}

UniversalResult decide_universal_bounded(const std::variant<GnnSpec, FormulaPtr>& spec,
                                         int max_vertices, bool undirected) {
  UniversalResult res;
  res.max_vertices = max_vertices;
  EnumConfig cfg;
  cfg.max_vertices = max_vertices;
  cfg.undirected = undirected;
  if (std::holds_alternative<GnnSpec>(spec)) {
    cfg.n_colors = std::get<GnnSpec>(spec).n_colors;
  } else {
    cfg.n_colors = std::max(formula_color_count(std::get<FormulaPtr>(spec)), 1);
  }
  enumerate_graphs(cfg, [&](const Graph& g) {
    bool all = true;
    if (std::holds_alternative<GnnSpec>(spec)) {
      const GnnSpec& gnn = std::get<GnnSpec>(spec);
      FeatureTable ft = forward(gnn, g);
      for (int v = 0; v < g.n && all; ++v) all = accepts_feature(ft.back()[v]);
    } else {
      std::vector<char> vals = eval_all(std::get<FormulaPtr>(spec), g);
      for (int v = 0; v < g.n && all; ++v) all = vals[v] != 0;
    }
    if (all) {
      res.found = true;
      res.graph = g;
      return false;
    }
    return true;
  });
  return res;
}

}  // namespace gnnv
