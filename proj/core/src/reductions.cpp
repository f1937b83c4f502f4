#include "gnnv/reductions.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gnnv/epa.hpp"
#include "gnnv/spectrum.hpp"

namespace gnnv {

namespace {

QfPresPtr make_qf(QfPres f) { return std::make_shared<const QfPres>(std::move(f)); }

Layer make_layer(int in_dim, int out_dim, Activation act) {
  Layer l;
  l.dim = out_dim;
  l.act = std::move(act);
  l.C = Mat(out_dim, zero_vec(in_dim));
  l.A_out = Mat(out_dim, zero_vec(in_dim));
  l.A_in = Mat(out_dim, zero_vec(in_dim));
  l.R = Mat(out_dim, zero_vec(in_dim));
  l.b = zero_vec(out_dim);
  return l;
}

}  // namespace

QfPresPtr q_atom(std::vector<Integer> coeffs, Integer c) {
  QfPres f;
  f.op = QfPres::Op::Atom;
  f.coeffs = std::move(coeffs);
  f.c = std::move(c);
  return make_qf(std::move(f));
}

QfPresPtr q_true() { return q_atom({}, 0); }

QfPresPtr q_not(QfPresPtr a) {
  QfPres f;
  f.op = QfPres::Op::Not;
  f.subs = {std::move(a)};
  return make_qf(std::move(f));
}

QfPresPtr q_and(std::vector<QfPresPtr> subs) {
  if (subs.empty()) return q_true();
  QfPres f;
  f.op = QfPres::Op::And;
  f.subs = std::move(subs);
  return make_qf(std::move(f));
}

QfPresPtr q_or(std::vector<QfPresPtr> subs) {
  if (subs.empty()) throw std::invalid_argument("q_or: empty disjunction");
  QfPres f;
  f.op = QfPres::Op::Or;
  f.subs = std::move(subs);
  return make_qf(std::move(f));
}

std::vector<QfPresPtr> q_eq_atoms(int i, int j, int k, const Integer& c, int n_vars) {
  std::vector<Integer> pos(n_vars, 0);
  pos[i] += 1;
  if (j >= 0) pos[j] -= 1;
  if (k >= 0) pos[k] -= 1;
  std::vector<Integer> neg(n_vars, 0);
  for (int t = 0; t < n_vars; ++t) neg[t] = -pos[t];
  return {q_atom(pos, c), q_atom(neg, -c)};
}

int qf_depth(const QfPresPtr& phi) {
  if (phi->op == QfPres::Op::Atom) return 1;
  int d = 0;
  for (const auto& s : phi->subs) d = std::max(d, qf_depth(s));
  return d + 1;
}

bool qf_eval(const QfPresPtr& phi, const Vec& x) {
  switch (phi->op) {
    case QfPres::Op::Atom: {
      Rational sum = 0;
      for (std::size_t t = 0; t < phi->coeffs.size(); ++t) {
        if (t >= x.size()) break;
        sum += Rational(phi->coeffs[t]) * x[t];
      }
      return sum >= Rational(phi->c);
    }
    case QfPres::Op::Not:
      return !qf_eval(phi->subs[0], x);
    case QfPres::Op::And:
      for (const auto& s : phi->subs)
        if (!qf_eval(s, x)) return false;
      return true;
    case QfPres::Op::Or:
      for (const auto& s : phi->subs)
        if (qf_eval(s, x)) return true;
      return false;
  }
  return false;
}

std::vector<Layer> presburger_test_layers(const QfPresPtr& phi, int prefix_dim) {
  struct Node {
    const QfPres* f;
    int depth = 0;
    std::vector<int> kids;
  };
  std::vector<Node> nodes;
  std::function<int(const QfPresPtr&)> collect = [&](const QfPresPtr& f) -> int {
    int idx = (int)nodes.size();
    nodes.push_back({f.get(), 0, {}});
    std::vector<int> kids;
    int dmax = 0;
    for (const auto& s : f->subs) {
      int k = collect(s);
      kids.push_back(k);
      dmax = std::max(dmax, nodes[k].depth);
    }
    nodes[idx].kids = std::move(kids);
    nodes[idx].depth = (f->op == QfPres::Op::Atom) ? 1 : dmax + 1;
    return idx;
  };
  collect(phi);

  int n_sub = (int)nodes.size();
  int height = nodes[0].depth;
  int full = prefix_dim + n_sub;
  std::vector<Layer> layers;
  for (int k = 1; k <= 2 * height; ++k) {
    int in_dim = (k == 1) ? prefix_dim : full;
    Layer ly = make_layer(in_dim, full, Activation::relu());
    for (int i = 0; i < prefix_dim && i < in_dim; ++i) ly.C[i][i] = 1;
    for (int idx = 0; idx < n_sub; ++idx) {
      const Node& nd = nodes[idx];
      int slot = prefix_dim + idx;
      int h = nd.depth;
      if (k == 2 * h - 1) {
        switch (nd.f->op) {
          case QfPres::Op::Atom: {
            if ((int)nd.f->coeffs.size() > prefix_dim)
              throw std::invalid_argument("presburger_test_layers: atom reads past prefix");
            ly.b[slot] = Rational(nd.f->c);
            for (std::size_t t = 0; t < nd.f->coeffs.size(); ++t)
              ly.C[slot][t] -= Rational(nd.f->coeffs[t]);
            break;
          }
          case QfPres::Op::And: {
            ly.b[slot] = (long)nd.kids.size();
            for (int c : nd.kids) ly.C[slot][prefix_dim + c] -= 1;
            break;
          }
          case QfPres::Op::Or: {
            ly.b[slot] = 1;
            for (int c : nd.kids) ly.C[slot][prefix_dim + c] -= 1;
            break;
          }
          case QfPres::Op::Not:
            break;  // handled entirely in the second phase
        }
      } else if (k == 2 * h) {
        if (nd.f->op == QfPres::Op::Not) {
          ly.C[slot][prefix_dim + nd.kids[0]] = -1;
        } else {
          ly.C[slot][slot] = -1;
        }
        ly.b[slot] = 1;
      } else if (k > 2 * h) {
        ly.C[slot][slot] = 1;
      }
    }
    layers.push_back(std::move(ly));
  }
  return layers;
}

void Cnf3::validate() const {
  if (n_vars < 0) throw std::invalid_argument("Cnf3: negative variable count");
  for (const auto& cl : clauses)
    for (int lit : cl) {
      if (lit == 0 || std::abs(lit) > n_vars)
        throw std::invalid_argument("Cnf3: literal out of range");
    }
}

bool Cnf3::eval(const std::vector<bool>& assignment) const {
  if ((int)assignment.size() != n_vars)
    throw std::invalid_argument("Cnf3::eval: assignment size mismatch");
  for (const auto& cl : clauses) {
    bool sat = false;
    for (int lit : cl) {
      bool v = assignment[std::abs(lit) - 1];
      if (lit > 0 ? v : !v) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

Cnf3 parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  Cnf3 out;
  long n_clauses = -1;
  bool header = false;
  std::vector<int> current;
  while (in >> tok) {
    if (tok == "c") {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (tok == "%") break;
    if (tok == "p") {
      std::string kind;
      if (!(in >> kind >> out.n_vars >> n_clauses) || kind != "cnf")
        throw std::invalid_argument("parse_dimacs: malformed problem line");
      header = true;
      continue;
    }
    if (!header) throw std::invalid_argument("parse_dimacs: literal before problem line");
    int lit = 0;
    try {
      lit = std::stoi(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_dimacs: bad token '" + tok + "'");
    }
    if (lit == 0) {
      if (current.empty() && (long)out.clauses.size() == n_clauses) break;
      if (current.empty() || current.size() > 3)
        throw std::invalid_argument("parse_dimacs: clause size must be 1..3");
      while (current.size() < 3) current.push_back(current.back());
      out.clauses.push_back({current[0], current[1], current[2]});
      current.clear();
    } else {
      current.push_back(lit);
    }
  }
  if (!header) throw std::invalid_argument("parse_dimacs: missing problem line");
  if (!current.empty()) throw std::invalid_argument("parse_dimacs: unterminated clause");
  if (n_clauses >= 0 && (long)out.clauses.size() != n_clauses)
    throw std::invalid_argument("parse_dimacs: clause count mismatch");
  out.validate();
  return out;
}

GnnSpec threesat_to_gnn(const Cnf3& phi) {
  phi.validate();
  int n = std::max(phi.n_vars, 1);
  int m = (int)phi.clauses.size();
  GnnSpec g;
  g.n_colors = n;

  // One clause indicator per entry: the clause value of a 0/1 assignment is
  // the number of satisfied literal occurrences, clamped to [0, 1].
  Layer l1 = make_layer(n, std::max(m, 1), Activation::trrelu());
  for (int t = 0; t < m; ++t) {
    for (int lit : phi.clauses[t]) {
      int v = std::abs(lit) - 1;
      if (lit > 0) {
        l1.C[t][v] += 1;
      } else {
        l1.C[t][v] -= 1;
        l1.b[t] += 1;
      }
    }
  }
  g.layers.push_back(std::move(l1));

  Layer l2 = make_layer(std::max(m, 1), 1, Activation::trrelu());
  for (int t = 0; t < m; ++t) l2.C[0][t] = 1;
  l2.b[0] = Rational(1 - m);
  g.layers.push_back(std::move(l2));
  return g;
}

Graph threesat_witness_graph(const Cnf3& phi, const std::vector<bool>& assignment) {
  if (!phi.eval(assignment))
    throw std::invalid_argument("threesat_witness_graph: assignment does not satisfy");
  Graph g(std::max(phi.n_vars, 1), 1);
  for (int v = 0; v < phi.n_vars; ++v)
    if (assignment[v]) g.colors[v].insert(0);
  return g;
}

std::optional<std::vector<bool>> threesat_solve(const Cnf3& phi) {
  phi.validate();
  if (phi.n_vars > 25) throw std::invalid_argument("threesat_solve: too many variables");
  std::vector<bool> a(phi.n_vars, false);
  for (unsigned long mask = 0; mask < (1ul << phi.n_vars); ++mask) {
    for (int v = 0; v < phi.n_vars; ++v) a[v] = (mask >> v) & 1;
    if (phi.eval(a)) return a;
  }
  return std::nullopt;
}

AlcPtr a_atom(int atom) {
  AlcConcept c;
  c.op = AlcConcept::Op::Atom;
  c.atom = atom;
  return std::make_shared<const AlcConcept>(std::move(c));
}

namespace {
AlcPtr alc_node(AlcConcept::Op op, AlcPtr l, AlcPtr r = nullptr) {
  AlcConcept c;
  c.op = op;
  c.left = std::move(l);
  c.right = std::move(r);
  return std::make_shared<const AlcConcept>(std::move(c));
}
}  // namespace

AlcPtr a_not(AlcPtr c) { return alc_node(AlcConcept::Op::Not, std::move(c)); }
AlcPtr a_and(AlcPtr a, AlcPtr b) {
  return alc_node(AlcConcept::Op::And, std::move(a), std::move(b));
}
AlcPtr a_or(AlcPtr a, AlcPtr b) {
  return alc_node(AlcConcept::Op::Or, std::move(a), std::move(b));
}
AlcPtr a_exists(AlcPtr c) { return alc_node(AlcConcept::Op::Exists, std::move(c)); }
AlcPtr a_forall(AlcPtr c) { return alc_node(AlcConcept::Op::Forall, std::move(c)); }

int alc_depth(const AlcPtr& c) {
  switch (c->op) {
    case AlcConcept::Op::Atom:
      return 0;
    case AlcConcept::Op::Not:
      return alc_depth(c->left);
    case AlcConcept::Op::And:
    case AlcConcept::Op::Or:
      return std::max(alc_depth(c->left), alc_depth(c->right));
    case AlcConcept::Op::Exists:
    case AlcConcept::Op::Forall:
      return 1 + alc_depth(c->left);
  }
  return 0;
}

namespace {

FormulaPtr count_is(Guard g, FormulaPtr body, Cmp cmp, long k) {
  return f_pres({PresTerm{Rational(1), g, std::move(body)}}, cmp, Rational(k));
}

FormulaPtr alc_directed(const AlcPtr& c, int n_atomic) {
  switch (c->op) {
    case AlcConcept::Op::Atom:
      if (c->atom < 0 || c->atom >= n_atomic)
        throw std::invalid_argument("alc_to_mp2: atomic concept out of range");
      return f_color(c->atom);
    case AlcConcept::Op::Not:
      return f_not(alc_directed(c->left, n_atomic));
    case AlcConcept::Op::And:
      return f_and(alc_directed(c->left, n_atomic), alc_directed(c->right, n_atomic));
    case AlcConcept::Op::Or:
      return f_or(alc_directed(c->left, n_atomic), alc_directed(c->right, n_atomic));
    case AlcConcept::Op::Exists:
      return count_is(Guard::Out, alc_directed(c->left, n_atomic), Cmp::Ge, 1);
    case AlcConcept::Op::Forall:
      return count_is(Guard::Out, f_not(alc_directed(c->left, n_atomic)), Cmp::Eq, 0);
  }
  return f_top();
}

// The undirected translation stratifies the model into levels marked by
// fresh colors, so that modal steps only ever look one level down and the
// symmetric edges cannot leak information back up.
FormulaPtr alc_level_marker(int level, int n_atomic, int max_level) {
  std::vector<FormulaPtr> parts = {f_color(n_atomic + level)};
  for (int i = 0; i <= max_level; ++i)
    if (i != level) parts.push_back(f_not(f_color(n_atomic + i)));
  return f_and(std::move(parts));
}

FormulaPtr alc_undirected(const AlcPtr& c, int n_atomic, int level, int max_level) {
  switch (c->op) {
    case AlcConcept::Op::Atom:
      if (c->atom < 0 || c->atom >= n_atomic)
        throw std::invalid_argument("alc_to_mp2: atomic concept out of range");
      return f_color(c->atom);
    case AlcConcept::Op::Not:
      return f_not(alc_undirected(c->left, n_atomic, level, max_level));
    case AlcConcept::Op::And:
      return f_and(alc_undirected(c->left, n_atomic, level, max_level),
                   alc_undirected(c->right, n_atomic, level, max_level));
    case AlcConcept::Op::Or:
      return f_or(alc_undirected(c->left, n_atomic, level, max_level),
                  alc_undirected(c->right, n_atomic, level, max_level));
    case AlcConcept::Op::Exists: {
      auto body = f_and(alc_level_marker(level + 1, n_atomic, max_level),
                        alc_undirected(c->left, n_atomic, level + 1, max_level));
      return count_is(Guard::Out, std::move(body), Cmp::Ge, 1);
    }
    case AlcConcept::Op::Forall: {
      auto body = f_and(alc_level_marker(level + 1, n_atomic, max_level),
                        f_not(alc_undirected(c->left, n_atomic, level + 1, max_level)));
      return count_is(Guard::Out, std::move(body), Cmp::Eq, 0);
    }
  }
  return f_top();
}

}  // namespace

FormulaPtr alc_to_mp2(const AlcPtr& c, int n_atomic, bool undirected) {
  if (!undirected) return alc_directed(c, n_atomic);
  int max_level = alc_depth(c);
  return f_and(alc_level_marker(0, n_atomic, max_level),
               alc_undirected(c, n_atomic, 0, max_level));
}

void EquationSystem::validate() const {
  if (n_vars < 1) throw std::invalid_argument("EquationSystem: need at least one variable");
  for (const auto& e : equations) {
    auto in_range = [&](int t) { return t >= 0 && t < n_vars; };
    if (!in_range(e.t1)) throw std::invalid_argument("EquationSystem: index out of range");
    if (e.kind != Equation::Kind::One) {
      if (!in_range(e.t2) || !in_range(e.t3))
        throw std::invalid_argument("EquationSystem: index out of range");
      if (e.t1 == e.t2 || e.t1 == e.t3 || e.t2 == e.t3)
        throw std::invalid_argument("EquationSystem: indices must be pairwise distinct");
    }
  }
}

bool EquationSystem::solves(const std::vector<Integer>& a) const {
  if ((int)a.size() != n_vars) return false;
  for (const auto& v : a)
    if (v < 0) return false;
  for (const auto& e : equations) {
    switch (e.kind) {
      case Equation::Kind::One:
        if (a[e.t1] != 1) return false;
        break;
      case Equation::Kind::Sum:
        if (a[e.t1] != a[e.t2] + a[e.t3]) return false;
        break;
      case Equation::Kind::Product:
        if (a[e.t1] != a[e.t2] * a[e.t3]) return false;
        break;
    }
  }
  return true;
}

std::optional<std::vector<Integer>> eqsys_solve_bounded(const EquationSystem& eps,
                                                        const Integer& max_value,
                                                        bool nontrivial) {
  eps.validate();
  std::vector<Integer> a(eps.n_vars, 0);
  std::optional<std::vector<Integer>> found;
  std::function<bool(int)> rec = [&](int i) -> bool {
    if (i == eps.n_vars) {
      if (nontrivial && std::all_of(a.begin(), a.end(),
                                    [](const Integer& v) { return v == 0; }))
        return false;
      if (eps.solves(a)) {
        found = a;
        return true;
      }
      return false;
    }
    for (Integer v = 0; v <= max_value; ++v) {
      a[i] = v;
      if (rec(i + 1)) return true;
    }
    return false;
  };
  rec(0);
  return found;
}

namespace {

std::vector<QfPresPtr> qe_const(int i, long c, int nv) {
  return q_eq_atoms(i, -1, -1, c, nv);
}
std::vector<QfPresPtr> qe_pair(int i, int j, int nv) {
  return q_eq_atoms(i, j, -1, 0, nv);
}
std::vector<QfPresPtr> qe_sum3(int i, int j, int k, int nv) {
  return q_eq_atoms(i, j, k, 0, nv);
}

void push_all(std::vector<QfPresPtr>& out, std::vector<QfPresPtr> more) {
  for (auto& f : more) out.push_back(std::move(f));
}

// Per-vertex structural check of the product-grid encoding. The entry layout
// of the feature vector it reads is fixed by the caller; `grid_count` maps an
// equation to the entry holding the vertex's count of grid-colored children,
// `row_flag` to its row-indicator entry, and `factor` to the entry holding
// the expected grid width.
QfPresPtr eqsys_structure_formula(const EquationSystem& eps, int nv,
                                  const std::function<int(int)>& grid_count,
                                  const std::function<int(int)>& row_flag,
                                  const std::function<int(int)>& factor,
                                  std::vector<QfPresPtr> extra_atoms) {
  std::vector<QfPresPtr> children;
  auto pad = [&]() {
    return q_or({q_and({q_true(), q_true()}), q_and({q_true(), q_true()})});
  };
  for (int t = 0; t < (int)eps.equations.size(); ++t) {
    const auto& e = eps.equations[t];
    if (e.kind != Equation::Kind::Product) {
      children.push_back(pad());
      continue;
    }
    std::vector<QfPresPtr> off;
    push_all(off, qe_const(grid_count(t), 0, nv));
    push_all(off, qe_const(row_flag(t), 0, nv));
    std::vector<QfPresPtr> on;
    push_all(on, qe_pair(grid_count(t), factor(t), nv));
    push_all(on, qe_const(row_flag(t), 1, nv));
    children.push_back(q_or({q_and(std::move(off)), q_and(std::move(on))}));
  }
  if (children.empty()) children.push_back(pad());
  push_all(children, std::move(extra_atoms));
  return q_and(std::move(children));
}

// The global count equations, checked on aggregated totals.
std::vector<QfPresPtr> eqsys_count_atoms(const EquationSystem& eps, int nv,
                                         const std::function<int(int)>& grid_total,
                                         const std::function<int(int)>& row_total) {
  std::vector<QfPresPtr> atoms;
  for (int t = 0; t < (int)eps.equations.size(); ++t) {
    const auto& e = eps.equations[t];
    switch (e.kind) {
      case Equation::Kind::One:
        push_all(atoms, qe_const(e.t1, 1, nv));
        break;
      case Equation::Kind::Sum:
        push_all(atoms, qe_sum3(e.t1, e.t2, e.t3, nv));
        break;
      case Equation::Kind::Product:
        push_all(atoms, qe_pair(grid_total(t), e.t1, nv));
        push_all(atoms, qe_pair(row_total(t), e.t3, nv));
        break;
    }
  }
  return atoms;
}

void append_gadget(GnnSpec& g, const QfPresPtr& psi, int prefix, int expected_layers) {
  auto layers = presburger_test_layers(psi, prefix);
  if ((int)layers.size() != expected_layers)
    throw std::logic_error("eqsys_to_gnn: unexpected gadget depth");
  for (auto& l : layers) g.layers.push_back(std::move(l));
}

GnnSpec eqsys_gnn_og(const EquationSystem& eps) {
  int n = eps.n_vars, m = (int)eps.equations.size();
  GnnSpec g;
  g.n_colors = n + 2 * m;

  // Entry layout after layer 1: [0,n) global color totals, [n,n+m) count of
  // grid-colored out-neighbors, [n+m,n+2m) own row indicator, n+2m constant 1.
  Layer l1 = make_layer(n + 2 * m, n + 2 * m + 1, Activation::relu());
  for (int i = 0; i < n; ++i) l1.R[i][i] = 1;
  for (int i = n; i < n + m; ++i) l1.A_out[i][i] = 1;
  for (int i = n + m; i < n + 2 * m; ++i) l1.C[i][i] = 1;
  l1.b[n + 2 * m] = 1;
  g.layers.push_back(std::move(l1));

  int nv1 = n + 2 * m + 1;
  auto psi1 = eqsys_structure_formula(
      eps, nv1, [&](int t) { return n + t; }, [&](int t) { return n + m + t; },
      [&](int t) { return eps.equations[t].t2; }, {});
  append_gadget(g, psi1, nv1, 8);

  // Aggregate: keep the totals, sum everything else over all vertices. The
  // last two entries become (vertex count, number of vertices passing the
  // structural check).
  Layer l10 = make_layer(g.layers.back().dim, n + 2 * m + 2, Activation::relu());
  for (int i = 0; i < n; ++i) l10.C[i][i] = 1;
  for (int i = n; i < n + 2 * m + 2; ++i) l10.R[i][i] = 1;
  g.layers.push_back(std::move(l10));

  int nv2 = n + 2 * m + 2;
  auto atoms = eqsys_count_atoms(eps, nv2, [&](int t) { return n + t; },
                                 [&](int t) { return n + m + t; });
  push_all(atoms, qe_pair(n + 2 * m, n + 2 * m + 1, nv2));
  append_gadget(g, q_and(std::move(atoms)), nv2, 4);

  Layer lf = make_layer(g.layers.back().dim, 1, Activation::relu());
  lf.C[0][n + 2 * m + 2] = 1;
  g.layers.push_back(std::move(lf));
  return g;
}

GnnSpec eqsys_gnn_bl(const EquationSystem& eps, bool undirected) {
  int n = eps.n_vars, m = (int)eps.equations.size();
  GnnSpec g;
  g.n_colors = n + 2 * m;

  int psi0_result = n + 2 * m;  // undirected only
  if (undirected) {
    // Entry layout after layer 1: [0,n) neighbors per color, [n,n+m) grid
    // neighbors, [n+m,n+2m) own row indicator.
    Layer l1 = make_layer(n + 2 * m, n + 2 * m, Activation::relu());
    for (int i = 0; i < n + m; ++i) l1.A_out[i][i] = 1;
    for (int i = n + m; i < n + 2 * m; ++i) l1.C[i][i] = 1;
    g.layers.push_back(std::move(l1));

    // "Anchor" vertices: the ones with a colored neighbor. The rest of the
    // construction uses "exactly one anchor neighbor" where the directed
    // variant would use in-degrees.
    std::vector<QfPresPtr> some;
    for (int i = 0; i < n; ++i) {
      std::vector<Integer> coef(n + 2 * m, 0);
      coef[i] = 1;
      some.push_back(q_atom(std::move(coef), 1));
    }
    append_gadget(g, q_or(std::move(some)), n + 2 * m, 4);
  } else {
    Layer l1 = make_layer(n + 2 * m, n + 2 * m + 1, Activation::relu());
    for (int i = 0; i < n + m; ++i) l1.A_out[i][i] = 1;
    for (int i = n + m; i < n + 2 * m; ++i) l1.C[i][i] = 1;
    l1.b[n + 2 * m] = 1;
    g.layers.push_back(std::move(l1));
  }

  // Pull the color totals down from the anchor: entries [n+2m, 2n+2m) copy
  // the per-color neighbor counts of the parent / anchor neighbor, entry
  // 2n+2m counts parents (must be exactly one), entry 2n+2m+1 is constant 1.
  Layer l2 = make_layer(g.layers.back().dim, 2 * n + 2 * m + 2, Activation::relu());
  for (int i = 0; i < n + 2 * m; ++i) l2.C[i][i] = 1;
  if (undirected) {
    for (int i = n + 2 * m; i < 2 * n + 2 * m; ++i) l2.A_out[i][i - (n + 2 * m)] = 1;
    l2.A_out[2 * n + 2 * m][psi0_result] = 1;
  } else {
    for (int i = n + 2 * m; i < 2 * n + 2 * m; ++i) l2.A_in[i][i - (n + 2 * m)] = 1;
    l2.A_in[2 * n + 2 * m][n + 2 * m] = 1;
  }
  l2.b[2 * n + 2 * m + 1] = 1;
  g.layers.push_back(std::move(l2));

  int nv1 = 2 * n + 2 * m + 2;
  auto psi1 = eqsys_structure_formula(
      eps, nv1, [&](int t) { return n + t; }, [&](int t) { return n + m + t; },
      [&](int t) { return n + 2 * m + eps.equations[t].t2; },
      qe_const(2 * n + 2 * m, 1, nv1));
  append_gadget(g, psi1, nv1, 8);

  // Aggregate at the root over its children: color totals come from its own
  // neighbor counts, grid and row totals from the children, and the last two
  // entries become (child count, children passing the structural check).
  Layer l11 = make_layer(g.layers.back().dim, n + 2 * m + 2, Activation::relu());
  for (int i = 0; i < n; ++i) l11.C[i][i] = 1;
  for (int i = n; i < n + 2 * m; ++i) l11.A_out[i][i] = 1;
  l11.A_out[n + 2 * m][2 * n + 2 * m + 1] = 1;
  l11.A_out[n + 2 * m + 1][2 * n + 2 * m + 2] = 1;
  g.layers.push_back(std::move(l11));

  int nv2 = n + 2 * m + 2;
  auto atoms = eqsys_count_atoms(eps, nv2, [&](int t) { return n + t; },
                                 [&](int t) { return n + m + t; });
  push_all(atoms, qe_pair(n + 2 * m, n + 2 * m + 1, nv2));
  if (undirected) {
    // Nontrivial solutions only: some color total must be positive.
    std::vector<QfPresPtr> some;
    for (int i = 0; i < n; ++i) {
      std::vector<Integer> coef(nv2, 0);
      coef[i] = 1;
      some.push_back(q_atom(std::move(coef), 1));
    }
    std::vector<QfPresPtr> parts;
    for (auto& a : atoms) parts.push_back(std::move(a));
    parts.push_back(q_or(std::move(some)));
    append_gadget(g, q_and(std::move(parts)), nv2, 6);
  } else {
    append_gadget(g, q_and(std::move(atoms)), nv2, 4);
  }

  Layer lf = make_layer(g.layers.back().dim, 1, Activation::relu());
  lf.C[0][n + 2 * m + 2] = 1;
  g.layers.push_back(std::move(lf));
  return g;
}

}  // namespace

GnnSpec eqsys_to_gnn(const EquationSystem& eps, EqsysTarget target) {
  eps.validate();
  switch (target) {
    case EqsysTarget::OgRelu:
      return eqsys_gnn_og(eps);
    case EqsysTarget::BlRelu:
      return eqsys_gnn_bl(eps, false);
    case EqsysTarget::BlReluUndirected:
      return eqsys_gnn_bl(eps, true);
    default:
      throw std::invalid_argument("eqsys_to_gnn: target is not a GNN target");
  }
}

FormulaPtr eqsys_to_mp2(const EquationSystem& eps) {
  eps.validate();
  int n = eps.n_vars, m = (int)eps.equations.size();
  auto P = [&](int t) { return f_color(t); };
  auto U = [&](int i) { return f_color(m + i); };

  std::vector<FormulaPtr> parts;
  // The copy colors and the variable colors are pairwise disjoint.
  for (int t = 0; t < m; ++t)
    for (int t2 = t + 1; t2 < m; ++t2)
      parts.push_back(count_is(Guard::Top, f_and(P(t), P(t2)), Cmp::Eq, 0));
  for (int i = 0; i < n; ++i)
    for (int i2 = i + 1; i2 < n; ++i2)
      parts.push_back(count_is(Guard::Top, f_and(U(i), U(i2)), Cmp::Eq, 0));
  // Every copy carries the same multiset of variable values.
  for (int t = 0; t + 1 < m; ++t)
    for (int i = 0; i < n; ++i)
      parts.push_back(pres_two_sided(
          Rational(0), {PresTerm{Rational(1), Guard::Top, f_and(P(t), U(i))}}, Cmp::Eq,
          Rational(0), {PresTerm{Rational(1), Guard::Top, f_and(P(t + 1), U(i))}}));

  for (int t = 0; t < m; ++t) {
    const auto& e = eps.equations[t];
    switch (e.kind) {
      case Equation::Kind::One:
        parts.push_back(count_is(Guard::Top, f_and(P(t), U(e.t1)), Cmp::Eq, 1));
        break;
      case Equation::Kind::Sum: {
        auto sources = f_or(U(e.t2), U(e.t3));
        auto imp1 = f_implies(f_and(P(t), sources),
                              count_is(Guard::Out, f_and(P(t), U(e.t1)), Cmp::Eq, 1));
        auto imp2 = f_implies(f_and(P(t), U(e.t1)),
                              count_is(Guard::In, f_and(P(t), sources), Cmp::Eq, 1));
        auto psi = f_and(std::move(imp1), std::move(imp2));
        parts.push_back(pres_two_sided(Rational(0),
                                       {PresTerm{Rational(1), Guard::Top, std::move(psi)}},
                                       Cmp::Eq, Rational(0),
                                       {PresTerm{Rational(1), Guard::Top, f_top()}}));
        break;
      }
      case Equation::Kind::Product: {
        auto fanout = pres_two_sided(
            Rational(0), {PresTerm{Rational(1), Guard::Out, f_and(P(t), U(e.t1))}},
            Cmp::Eq, Rational(0),
            {PresTerm{Rational(1), Guard::Top, f_and(P(t), U(e.t3))}});
        auto imp1 = f_implies(f_and(P(t), U(e.t2)), std::move(fanout));
        auto imp2 = f_implies(f_and(P(t), U(e.t1)),
                              count_is(Guard::In, f_and(P(t), U(e.t2)), Cmp::Eq, 1));
        auto psi = f_and(std::move(imp1), std::move(imp2));
        parts.push_back(pres_two_sided(Rational(0),
                                       {PresTerm{Rational(1), Guard::Top, std::move(psi)}},
                                       Cmp::Eq, Rational(0),
                                       {PresTerm{Rational(1), Guard::Top, f_top()}}));
        break;
      }
    }
  }
  return f_and(std::move(parts));
}

namespace {

long to_long_checked(const Integer& v, const char* what) {
  if (v < 0 || v > 1'000'000) throw std::invalid_argument(std::string(what) + ": value out of range");
  return (long)v.get_si();
}

Graph eqsys_witness_og(const EquationSystem& eps, const std::vector<Integer>& a) {
  int n = eps.n_vars, m = (int)eps.equations.size();
  Integer amax_z = 0;
  for (const auto& v : a) amax_z = std::max(amax_z, v);
  long amax = to_long_checked(amax_z, "eqsys_witness_graph");
  if (amax == 0) return Graph(n + 2 * m, 1);

  // Row vertices v_1..v_amax, then the amax * amax grid.
  Graph g(n + 2 * m, (int)(amax + amax * amax));
  auto row = [&](long j) { return (int)(j - 1); };
  auto grid = [&](long j, long jp) { return (int)(amax + (j - 1) * amax + (jp - 1)); };
  for (int i = 0; i < n; ++i)
    for (long j = 1; j <= to_long_checked(a[i], "eqsys_witness_graph"); ++j)
      g.colors[i].insert(row(j));
  for (int t = 0; t < m; ++t) {
    const auto& e = eps.equations[t];
    if (e.kind != Equation::Kind::Product) continue;
    long h = to_long_checked(a[e.t3], "eqsys_witness_graph");
    long w = to_long_checked(a[e.t2], "eqsys_witness_graph");
    for (long j = 1; j <= h; ++j) {
      g.colors[n + m + t].insert(row(j));
      for (long jp = 1; jp <= w; ++jp) g.colors[n + t].insert(grid(j, jp));
    }
  }
  for (long j = 1; j <= amax; ++j)
    for (long jp = 1; jp <= amax; ++jp) g.add_edge(row(j), grid(j, jp));
  return g;
}

Graph eqsys_witness_bl(const EquationSystem& eps, const std::vector<Integer>& a) {
  int n = eps.n_vars, m = (int)eps.equations.size();
  Integer amax_z = 0;
  for (const auto& v : a) amax_z = std::max(amax_z, v);
  long amax = to_long_checked(amax_z, "eqsys_witness_graph");
  if (amax == 0) return Graph(n + 2 * m, 1);

  // Root v_0, rows v_1..v_amax, then a grid row for every v_j including the
  // root; the root's grid row carries the variable colors.
  Graph g(n + 2 * m, (int)((amax + 1) + (amax + 1) * amax));
  auto row = [&](long j) { return (int)j; };  // j in [0, amax]
  auto grid = [&](long j, long jp) { return (int)((amax + 1) + j * amax + (jp - 1)); };
  for (int i = 0; i < n; ++i)
    for (long j = 1; j <= to_long_checked(a[i], "eqsys_witness_graph"); ++j)
      g.colors[i].insert(grid(0, j));
  for (int t = 0; t < m; ++t) {
    const auto& e = eps.equations[t];
    if (e.kind != Equation::Kind::Product) continue;
    long h = to_long_checked(a[e.t3], "eqsys_witness_graph");
    long w = to_long_checked(a[e.t2], "eqsys_witness_graph");
    for (long j = 1; j <= h; ++j) {
      g.colors[n + m + t].insert(row(j));
      for (long jp = 1; jp <= w; ++jp) g.colors[n + t].insert(grid(j, jp));
    }
  }
  for (long j = 0; j <= amax; ++j)
    for (long jp = 1; jp <= amax; ++jp) g.add_edge(row(j), grid(j, jp));
  for (long j = 1; j <= amax; ++j) g.add_edge(row(0), row(j));
  return g;
}

Graph eqsys_witness_mp2(const EquationSystem& eps, const std::vector<Integer>& a) {
  int n = eps.n_vars, m = (int)eps.equations.size();
  std::vector<long> av(n);
  long block = 0;
  std::vector<long> offset(n, 0);
  for (int i = 0; i < n; ++i) {
    av[i] = to_long_checked(a[i], "eqsys_witness_graph");
    offset[i] = block;
    block += av[i];
  }
  long total = (long)m * block;
  if (total == 0) return Graph(n + m, 1);

  Graph g(n + m, (int)total);
  auto id = [&](int t, int i, long j) { return (int)(t * block + offset[i] + j); };
  for (int t = 0; t < m; ++t)
    for (int i = 0; i < n; ++i)
      for (long j = 0; j < av[i]; ++j) {
        g.colors[t].insert(id(t, i, j));
        g.colors[m + i].insert(id(t, i, j));
      }
  for (int t = 0; t < m; ++t) {
    const auto& e = eps.equations[t];
    switch (e.kind) {
      case Equation::Kind::One:
        break;
      case Equation::Kind::Sum:
        for (long j = 0; j < av[e.t2]; ++j) g.add_edge(id(t, e.t2, j), id(t, e.t1, j));
        for (long j = 0; j < av[e.t3]; ++j)
          g.add_edge(id(t, e.t3, j), id(t, e.t1, av[e.t2] + j));
        break;
      case Equation::Kind::Product:
        for (long j = 0; j < av[e.t2]; ++j)
          for (long jp = 0; jp < av[e.t3]; ++jp)
            g.add_edge(id(t, e.t2, j), id(t, e.t1, j * av[e.t3] + jp));
        break;
    }
  }
  return g;
}

}  // namespace

std::pair<Graph, int> eqsys_witness_graph(const EquationSystem& eps,
                                          const std::vector<Integer>& solution,
                                          EqsysTarget target) {
  eps.validate();
  if (!eps.solves(solution))
    throw std::invalid_argument("eqsys_witness_graph: not a solution");
  switch (target) {
    case EqsysTarget::OgRelu:
      return {eqsys_witness_og(eps, solution), 0};
    case EqsysTarget::BlRelu:
      return {eqsys_witness_bl(eps, solution), 0};
    case EqsysTarget::BlReluUndirected:
      return {symmetric_closure(eqsys_witness_bl(eps, solution)), 0};
    case EqsysTarget::Mp2:
      return {eqsys_witness_mp2(eps, solution), 0};
    case EqsysTarget::Mp2Undirected:
      return {symmetric_closure(eqsys_witness_mp2(eps, solution)), 0};
  }
  throw std::invalid_argument("eqsys_witness_graph: unknown target");
}

void TcMachine::validate() const {
  if (instructions.empty()) throw std::invalid_argument("TcMachine: empty program");
  if (instructions.back().kind != TcInstruction::Kind::Halt)
    throw std::invalid_argument("TcMachine: last instruction must halt");
  int n = (int)instructions.size();
  for (const auto& ins : instructions) {
    if (ins.kind != TcInstruction::Kind::Halt && (ins.counter < 0 || ins.counter > 1))
      throw std::invalid_argument("TcMachine: counter must be 0 or 1");
    if (ins.kind == TcInstruction::Kind::IfZero && (ins.target < 1 || ins.target > n))
      throw std::invalid_argument("TcMachine: jump target out of range");
  }
}

TcRun tcm_run(const TcMachine& m, long max_steps) {
  m.validate();
  TcRun run;
  TcConfiguration cur;
  run.configs.push_back(cur);
  for (long step = 0; step < max_steps; ++step) {
    const auto& ins = m.instructions[cur.state - 1];
    if (ins.kind == TcInstruction::Kind::Halt) {
      run.halted = true;
      return run;
    }
    if (ins.kind == TcInstruction::Kind::Inc) {
      (ins.counter == 0 ? cur.c0 : cur.c1) += 1;
      cur.state += 1;
    } else {
      Integer& c = (ins.counter == 0 ? cur.c0 : cur.c1);
      if (c == 0) {
        cur.state = ins.target;
      } else {
        c -= 1;
        cur.state += 1;
      }
    }
    run.configs.push_back(cur);
  }
  run.halted = m.instructions[cur.state - 1].kind == TcInstruction::Kind::Halt;
  return run;
}

int tcm_color_count(const TcMachine& m, bool undirected) {
  return (int)m.instructions.size() + (undirected ? 7 : 4);
}

namespace {

// Color layout: S = 0, T = 1, C0 = 2, C1 = 3, one color per instruction from
// 4 on; the undirected variant appends three position-modulo-3 markers.
struct TcmColors {
  int n;
  FormulaPtr S() const { return f_color(0); }
  FormulaPtr T() const { return f_color(1); }
  FormulaPtr Ci(int i) const { return f_color(2 + i); }
  FormulaPtr Q(int q) const { return f_color(3 + q); }  // q is 1-based
  FormulaPtr Qany() const {
    std::vector<FormulaPtr> qs;
    for (int q = 1; q <= n; ++q) qs.push_back(Q(q));
    return f_or(std::move(qs));
  }
  FormulaPtr Cany() const { return f_or(Ci(0), Ci(1)); }
  FormulaPtr idx(int a) const { return f_color(3 + n + 1 + ((a % 3) + 3) % 3); }
};

FormulaPtr exactly_one_of(const std::vector<FormulaPtr>& options) {
  std::vector<FormulaPtr> cases;
  for (std::size_t i = 0; i < options.size(); ++i) {
    std::vector<FormulaPtr> conj = {options[i]};
    for (std::size_t j = 0; j < options.size(); ++j)
      if (j != i) conj.push_back(f_not(options[j]));
    cases.push_back(f_and(std::move(conj)));
  }
  return f_or(std::move(cases));
}

FormulaPtr tcm_directed(const TcMachine& m) {
  TcmColors col{(int)m.instructions.size()};
  int n = col.n;

  auto zero = [&](int i) { return count_is(Guard::Out, col.Ci(i), Cmp::Eq, 0); };
  auto succ = [&](int j) { return count_is(Guard::Out, col.Q(j), Cmp::Eq, 1); };
  // Counter change along the successor edge: counters reachable in two hops
  // minus the vertex's own counters. The detour hops (to the start vertex
  // and through counter vertices) contribute nothing because neither has
  // counter-colored out-neighbors.
  auto diff = [&](int i, long delta) {
    return f_twohop({TwoHopTerm{Rational(1), true, true, col.Ci(i)}},
                    {PresTerm{Rational(-1), Guard::Out, col.Ci(i)}}, Cmp::Eq,
                    Rational(delta));
  };

  std::vector<FormulaPtr> types;
  for (int c = 0; c < n + 4; ++c) types.push_back(f_color(c));
  std::vector<FormulaPtr> parts = {exactly_one_of(types)};

  auto start_body = f_and({col.Q(1), zero(0), zero(1)});
  parts.push_back(f_implies(col.S(), f_and(count_is(Guard::Out, f_top(), Cmp::Eq, 1),
                                           count_is(Guard::Out, start_body, Cmp::Eq, 1))));

  auto aux = f_or(col.Cany(), col.T());
  parts.push_back(f_implies(
      aux, f_and(count_is(Guard::Out, col.S(), Cmp::Eq, 1),
                 count_is(Guard::Out, f_or({col.T(), col.Cany(), col.Qany()}), Cmp::Eq, 0))));

  parts.push_back(f_implies(
      col.Qany(),
      f_and({count_is(Guard::Out, f_or(col.Qany(), col.T()), Cmp::Eq, 1),
             count_is(Guard::Out, col.S(), Cmp::Eq, 1),
             count_is(Guard::In, f_or(col.S(), col.Qany()), Cmp::Eq, 1),
             count_is(Guard::In, f_or(col.T(), col.Cany()), Cmp::Eq, 0)})));

  for (int q = 1; q <= n; ++q) {
    const auto& ins = m.instructions[q - 1];
    FormulaPtr psi;
    switch (ins.kind) {
      case TcInstruction::Kind::Inc:
        psi = f_and({succ(q + 1), diff(ins.counter, 1), diff(1 - ins.counter, 0)});
        break;
      case TcInstruction::Kind::IfZero: {
        auto taken = f_and({succ(ins.target), diff(0, 0), diff(1, 0)});
        auto fall = f_and({succ(q + 1), diff(ins.counter, -1), diff(1 - ins.counter, 0)});
        psi = f_and(f_implies(zero(ins.counter), std::move(taken)),
                    f_implies(f_not(zero(ins.counter)), std::move(fall)));
        break;
      }
      case TcInstruction::Kind::Halt:
        psi = count_is(Guard::Out, col.T(), Cmp::Eq, 1);
        break;
    }
    parts.push_back(f_implies(col.Q(q), std::move(psi)));
  }
  return f_and(std::move(parts));
}

FormulaPtr tcm_undirected(const TcMachine& m) {
  TcmColors col{(int)m.instructions.size()};
  int n = col.n;

  auto zero = [&](int i) { return count_is(Guard::Out, col.Ci(i), Cmp::Eq, 0); };
  auto succ_q = [&](int j, int a) {
    return count_is(Guard::Out, f_and(col.Q(j), col.idx(a + 1)), Cmp::Eq, 1);
  };
  // Counter vertices are adjacent to their own configuration vertex only, so
  // filtering the far end by the next position marker isolates the successor
  // configuration's counters.
  auto diff = [&](int i, long delta, int a) {
    return f_twohop({TwoHopTerm{Rational(1), true, true, f_and(col.Ci(i), col.idx(a + 1))}},
                    {PresTerm{Rational(-1), Guard::Out, col.Ci(i)}}, Cmp::Eq,
                    Rational(delta));
  };
  auto good = f_and({col.Q(1), col.idx(1), zero(0), zero(1)});

  std::vector<FormulaPtr> types;
  for (int c = 0; c < n + 4; ++c) types.push_back(f_color(c));
  std::vector<FormulaPtr> idxs = {col.idx(0), col.idx(1), col.idx(2)};
  std::vector<FormulaPtr> parts = {exactly_one_of(types), exactly_one_of(idxs)};

  // A configuration vertex with no predecessor-position neighbor must be the
  // initial configuration; the start vertex enforces this on its neighbors.
  std::vector<FormulaPtr> initform_parts;
  for (int a = 0; a < 3; ++a)
    initform_parts.push_back(f_implies(
        col.idx(a),
        count_is(Guard::Out, f_and(col.Qany(), col.idx(a - 1)), Cmp::Eq, 0)));
  auto initform = f_and(std::move(initform_parts));
  parts.push_back(f_implies(
      col.S(),
      f_and(count_is(Guard::Out, f_and({col.Qany(), initform, f_not(good)}), Cmp::Eq, 0),
            count_is(Guard::Out, f_and(col.Qany(), initform), Cmp::Ge, 1))));

  for (int b = 0; b < 3; ++b)
    parts.push_back(f_implies(
        f_and(col.Cany(), col.idx(b)),
        f_and({count_is(Guard::Out, f_and(col.Qany(), col.idx(b)), Cmp::Eq, 1),
               count_is(Guard::Out, f_or({col.S(), col.T(), col.Cany()}), Cmp::Eq, 0),
               count_is(Guard::Out, f_and(col.Qany(), f_not(col.idx(b))), Cmp::Eq, 0)})));

  for (int a = 0; a < 3; ++a)
    parts.push_back(f_implies(
        f_and(col.T(), col.idx(a)),
        f_and({count_is(Guard::Out, col.S(), Cmp::Eq, 1),
               count_is(Guard::Out, f_and(col.Qany(), col.idx(a - 1)), Cmp::Eq, 1),
               count_is(Guard::Out, col.Cany(), Cmp::Eq, 0)})));

  for (int a = 0; a < 3; ++a) {
    auto pred = f_and(col.Qany(), col.idx(a - 1));
    parts.push_back(f_implies(
        f_and(col.Qany(), col.idx(a)),
        f_and({count_is(Guard::Out, f_and(f_or(col.Qany(), col.T()), col.idx(a + 1)),
                        Cmp::Eq, 1),
               count_is(Guard::Out, pred, Cmp::Le, 1),
               f_or(count_is(Guard::Out, pred, Cmp::Ge, 1), good),
               count_is(Guard::Out, col.S(), Cmp::Eq, 1)})));
  }

  for (int q = 1; q <= n; ++q) {
    const auto& ins = m.instructions[q - 1];
    for (int a = 0; a < 3; ++a) {
      FormulaPtr psi;
      switch (ins.kind) {
        case TcInstruction::Kind::Inc:
          psi = f_and({succ_q(q + 1, a), diff(ins.counter, 1, a), diff(1 - ins.counter, 0, a)});
          break;
        case TcInstruction::Kind::IfZero: {
          auto taken = f_and({succ_q(ins.target, a), diff(0, 0, a), diff(1, 0, a)});
          auto fall =
              f_and({succ_q(q + 1, a), diff(ins.counter, -1, a), diff(1 - ins.counter, 0, a)});
          psi = f_and(f_implies(zero(ins.counter), std::move(taken)),
                      f_implies(f_not(zero(ins.counter)), std::move(fall)));
          break;
        }
        case TcInstruction::Kind::Halt:
          psi = count_is(Guard::Out, f_and(col.T(), col.idx(a + 1)), Cmp::Eq, 1);
          break;
      }
      parts.push_back(f_implies(f_and(col.Q(q), col.idx(a)), std::move(psi)));
    }
  }
  return f_and(std::move(parts));
}

}  // namespace

FormulaPtr tcm_to_m2p2(const TcMachine& m, bool undirected) {
  m.validate();
  return undirected ? tcm_undirected(m) : tcm_directed(m);
}

Graph tcm_witness_graph(const TcMachine& m, const TcRun& run, bool undirected) {
  m.validate();
  if (!run.halted || run.configs.empty())
    throw std::invalid_argument("tcm_witness_graph: run did not halt");
  int n = (int)m.instructions.size();
  int len = (int)run.configs.size();

  long n_counters = 0;
  for (const auto& cfg : run.configs)
    n_counters += to_long_checked(cfg.c0, "tcm_witness_graph") +
                  to_long_checked(cfg.c1, "tcm_witness_graph");

  Graph g(tcm_color_count(m, undirected), len + 2 + (int)n_counters);
  g.undirected = undirected;
  int vs = 0, vt = len + 1;
  auto vq = [&](int i) { return i; };  // configuration i, 1-based

  g.colors[0].insert(vs);
  g.colors[1].insert(vt);
  auto idx_color = [&](int a) { return 3 + n + 1 + ((a % 3) + 3) % 3; };
  if (undirected) {
    g.colors[idx_color(0)].insert(vs);
    g.colors[idx_color(len + 1)].insert(vt);
  }

  g.add_edge(vs, vq(1));
  for (int i = 1; i < len; ++i) g.add_edge(vq(i), vq(i + 1));
  g.add_edge(vq(len), vt);

  int next_id = len + 2;
  for (int i = 1; i <= len; ++i) {
    const auto& cfg = run.configs[i - 1];
    g.colors[3 + cfg.state].insert(vq(i));
    if (undirected) g.colors[idx_color(i)].insert(vq(i));
    for (int b = 0; b < 2; ++b) {
      long cnt = to_long_checked(b == 0 ? cfg.c0 : cfg.c1, "tcm_witness_graph");
      for (long j = 0; j < cnt; ++j) {
        int ctr = next_id++;
        g.colors[2 + b].insert(ctr);
        if (undirected) g.colors[idx_color(i)].insert(ctr);
        g.add_edge(vq(i), ctr);
        if (!undirected) g.add_edge(ctr, vs);
      }
    }
    g.add_edge(vq(i), vs);
  }
  g.add_edge(vt, vs);
  return g;
}

Graph bipolar_graph(int n1, int n2, bool undirected) {
  if (n1 < 0 || n2 < 0) throw std::invalid_argument("bipolar_graph: negative pole size");
  Graph g(2, 3 + n1 + n2);
  g.undirected = undirected;
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  for (int i = 0; i < n1; ++i) {
    g.add_edge(1, 3 + i);
    g.colors[0].insert(3 + i);
  }
  for (int i = 0; i < n2; ++i) {
    g.add_edge(2, 3 + n1 + i);
    g.colors[1].insert(3 + n1 + i);
  }
  return g;
}

FormulaPtr bipolar_separation_formula() {
  return f_twohop({TwoHopTerm{Rational(1), true, true, f_color(0)},
                   TwoHopTerm{Rational(-1), true, true, f_color(1)}},
                  {}, Cmp::Eq, Rational(0));
}

Integer bipolar_threshold(const GnnSpec& gnn, long size_cap) {
  gnn.validate();
  auto sp = overapprox_spectrum(gnn, size_cap);
  Integer best = 0;
  for (int l = 1; l <= gnn.n_layers(); ++l) {
    const Layer& ly = gnn.layers[l - 1];
    Rational tl = ly.act.left_threshold();
    Rational tr = ly.act.right_threshold();
    auto vs = sp.vectors(l - 1, gnn.dim(l - 1));
    for (int i = 0; i < ly.dim; ++i) {
      std::set<Rational> qs, ps;
      for (const auto& s : vs) qs.insert(dot(ly.A_out[i], s));
      for (const auto& s2 : vs)
        for (const auto& s3 : vs)
          ps.insert(dot(ly.C[i], s2) + dot(ly.A_in[i], s3) + ly.b[i]);
      for (const auto& q : qs) {
        if (q == 0) continue;
        for (const auto& p : ps) {
          // Smallest multiplicity at which q-slope aggregation pushes the
          // pre-activation past the saturated region.
          if (q > 0 && p < tr) {
            best = std::max(best, rational_ceil((tr - p) / q));
          } else if (q < 0 && p > tl) {
            best = std::max(best, rational_ceil((p - tl) / -q));
          }
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hardness generator for the star formulas (declared in epa.hpp).

namespace {

QfPresPtr epa_to_qfpres(const EpaPtr& e, const std::map<std::string, int>& index,
                        int n_vars) {
  switch (e->op) {
    case EpaFormula::Op::LinGe: {
      std::vector<QfPresPtr> atoms;
      for (const auto& row : e->rows) {
        std::vector<Integer> coeffs(n_vars, 0);
        for (const auto& [name, c] : row.coeffs) {
          auto it = index.find(name);
          if (it == index.end())
            throw std::invalid_argument("epa_to_ol_relu_gnn: unknown variable " + name);
          coeffs[it->second] += c;
        }
        atoms.push_back(q_atom(std::move(coeffs), row.rhs));
      }
      return q_and(std::move(atoms));
    }
    case EpaFormula::Op::And:
      return q_and({epa_to_qfpres(e->left, index, n_vars),
                    epa_to_qfpres(e->right, index, n_vars)});
    case EpaFormula::Op::Or:
      return q_or({epa_to_qfpres(e->left, index, n_vars),
                   epa_to_qfpres(e->right, index, n_vars)});
    default:
      throw std::invalid_argument("epa_to_ol_relu_gnn: formula must be quantifier-free");
  }
}

// Splits a normal-form formula into its per-level star-free parts, outermost
// first: psi_0 & Star(psi_1 & Star(... psi_k)).
std::vector<EpaPtr> peel_levels(const EpaPtr& phi) {
  std::vector<EpaPtr> levels;
  EpaPtr p = phi;
  while (true) {
    if (p->op == EpaFormula::Op::And && p->right && p->right->op == EpaFormula::Op::Star &&
        star_height(p->left) == 0) {
      levels.push_back(p->left);
      p = p->right->sub;
    } else if (p->op == EpaFormula::Op::Star) {
      levels.push_back(e_true());
      p = p->sub;
    } else if (star_height(p) == 0) {
      levels.push_back(p);
      break;
    } else {
      throw std::invalid_argument("epa hardness: formula is not in normal form");
    }
  }
  return levels;
}

}  // namespace

GnnSpec epa_to_ol_relu_gnn(const EpaPtr& phi, const std::vector<std::string>& vars) {
  if (vars.empty()) throw std::invalid_argument("epa_to_ol_relu_gnn: no variables");
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < vars.size(); ++i) index[vars[i]] = (int)i;
  int n = (int)vars.size();
  auto levels = peel_levels(phi);
  int k = (int)levels.size() - 1;

  GnnSpec g;
  g.n_colors = n;
  // Entry layout between stages: [0,n) the summed child tuple, n child count,
  // n+1 children passing the previous level's test, n+2 constant 1, n+3 the
  // current level's test result.
  Layer l1 = make_layer(n, n + 3, Activation::relu());
  for (int i = 0; i < n; ++i) l1.A_out[i][i] = 1;
  l1.b[n + 2] = 1;
  g.layers.push_back(std::move(l1));

  auto qf0 = epa_to_qfpres(levels[k], index, n);
  for (auto& l : presburger_test_layers(qf0, n + 3)) g.layers.push_back(std::move(l));

  for (int t = k - 1; t >= 0; --t) {
    Layer agg = make_layer(g.layers.back().dim, n + 3, Activation::relu());
    for (int i = 0; i < n; ++i) agg.A_out[i][i] = 1;
    agg.A_out[n][n + 2] = 1;
    agg.A_out[n + 1][n + 3] = 1;
    agg.b[n + 2] = 1;
    g.layers.push_back(std::move(agg));

    std::vector<QfPresPtr> parts = {epa_to_qfpres(levels[t], index, n)};
    push_all(parts, q_eq_atoms(n, n + 1, -1, 0, n + 2));
    auto psi = q_and(std::move(parts));
    for (auto& l : presburger_test_layers(psi, n + 3)) g.layers.push_back(std::move(l));
  }

  Layer lf = make_layer(g.layers.back().dim, 1, Activation::relu());
  lf.C[0][n + 3] = 1;
  g.layers.push_back(std::move(lf));
  return g;
}

Graph epa_hardness_witness_graph(const EpaPtr& phi, const std::vector<std::string>& vars,
                                 const EpaAssignment& sigma, const EpaWitnessPtr& w) {
  if (vars.empty()) throw std::invalid_argument("epa_hardness_witness_graph: no variables");
  int n = (int)vars.size();
  auto levels = peel_levels(phi);
  int k = (int)levels.size() - 1;

  // Parallel formula/witness walk down the level spine.
  std::vector<EpaPtr> spine;  // spine[j] = formula at level j
  {
    EpaPtr p = phi;
    for (int j = 0; j < k; ++j) {
      spine.push_back(p);
      p = (p->op == EpaFormula::Op::Star) ? p->sub : p->right->sub;
    }
    spine.push_back(p);
  }

  auto tuple_of = [&](const EpaAssignment& asg) {
    std::vector<Integer> a(n, 0);
    for (int i = 0; i < n; ++i) {
      auto it = asg.find(vars[i]);
      if (it != asg.end()) a[i] = it->second;
      if (a[i] < 0)
        throw std::invalid_argument("epa_hardness_witness_graph: negative value");
    }
    return a;
  };

  std::function<Graph(int, const std::vector<Integer>&, const EpaWitnessPtr&)> build =
      [&](int j, const std::vector<Integer>& a, const EpaWitnessPtr& wit) -> Graph {
    if (j == k) {
      Integer amax_z = 0;
      for (const auto& v : a) amax_z = std::max(amax_z, v);
      long amax = to_long_checked(amax_z, "epa_hardness_witness_graph");
      Graph g(n, (int)(1 + amax));
      for (int c = 0; c < n; ++c)
        for (long leaf = 0; leaf < to_long_checked(a[c], "epa_hardness_witness_graph");
             ++leaf)
          g.colors[c].insert(1 + (int)leaf);
      for (long leaf = 0; leaf < amax; ++leaf) g.add_edge(0, 1 + (int)leaf);
      return g;
    }
    const EpaWitnessPtr& star_w =
        (spine[j]->op == EpaFormula::Op::Star) ? wit : wit->right;
    if (!star_w) throw std::invalid_argument("epa_hardness_witness_graph: missing witness");
    Graph g(n, 1);
    for (const auto& [asg, sw] : star_w->summands) {
      Graph child = build(j + 1, tuple_of(asg), sw);
      int base = g.n;
      g.n += child.n;
      for (const auto& [u, v] : child.edges) g.edges.insert({u + base, v + base});
      for (int c = 0; c < n; ++c)
        for (int v : child.colors[c]) g.colors[c].insert(v + base);
      g.add_edge(0, base);
    }
    return g;
  };

  return build(0, tuple_of(sigma), w);
}

}  // namespace gnnv
