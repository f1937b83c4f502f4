#include "gnnv/oracle.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

#include "gnnv/fixed_point.hpp"

namespace gnnv {

namespace {

std::vector<std::pair<int, int>> edge_slots(int n, bool undirected) {
  std::vector<std::pair<int, int>> slots;
  for (int u = 0; u < n; ++u)
    for (int v = undirected ? u : 0; v < n; ++v) slots.push_back({u, v});
  return slots;
}

}  // namespace

void enumerate_graphs(const EnumConfig& cfg, const std::function<bool(const Graph&)>& fn) {
  if (cfg.max_vertices < 1 || cfg.n_colors < 0)
    throw std::invalid_argument("enumerate_graphs: bad configuration");
  for (int n = 1; n <= cfg.max_vertices; ++n) {
    auto slots = edge_slots(n, cfg.undirected);
    std::size_t n_edge = slots.size();
    std::size_t n_bits = n_edge + (std::size_t)cfg.n_colors * n;
    std::vector<char> bits(n_bits, 0);
    while (true) {
      Graph g(cfg.n_colors, n);
      g.undirected = cfg.undirected;
      for (std::size_t e = 0; e < n_edge; ++e)
        if (bits[e]) g.add_edge(slots[e].first, slots[e].second);
      for (int c = 0; c < cfg.n_colors; ++c)
        for (int v = 0; v < n; ++v)
          if (bits[n_edge + (std::size_t)c * n + v]) g.colors[c].insert(v);
      if (!fn(g)) return;

      std::size_t i = 0;
      while (i < n_bits && bits[i]) bits[i++] = 0;
      if (i == n_bits) break;
      bits[i] = 1;
    }
  }
}

Integer enumeration_count(const EnumConfig& cfg) {
  Integer total = 0;
  for (int n = 1; n <= cfg.max_vertices; ++n) {
    std::size_t n_edge = edge_slots(n, cfg.undirected).size();
    std::size_t n_bits = n_edge + (std::size_t)cfg.n_colors * n;
    Integer count;
    mpz_ui_pow_ui(count.get_mpz_t(), 2, n_bits);
    total += count;
  }
  return total;
}

bool spec_accepts(const SpecOrFormula& spec, const Graph& g, int v) {
  if (const auto* gnn = std::get_if<GnnSpec>(&spec)) return accepts(*gnn, g, v);
  return eval_formula(std::get<FormulaPtr>(spec), g, v);
}

namespace {

// Integer constants are kept well below the 64-bit range so that a handful of
// additions and one multiplication cannot wrap before the overflow checks.
constexpr long kConstLimit = 1L << 40;

bool fits(const Integer& z, long& out) {
  if (!z.fits_slong_p()) return false;
  out = z.get_si();
  return -kConstLimit < out && out < kConstLimit;
}

bool omul(long a, long b, long& r) { return !__builtin_mul_overflow(a, b, &r); }
bool oadd(long a, long b, long& r) { return !__builtin_add_overflow(a, b, &r); }

// Flattened form of a normalized formula: nodes in an order where children
// precede parents (sharing preserved through the pointer structure), with all
// quantifier coefficients as plain integers.
struct FastFormula {
  struct Term {
    long lambda = 0;
    Guard guard = Guard::Out;
    int body = -1;
  };
  struct TwoTerm {
    long lambda = 0;
    bool h1 = true, h2 = true;
    int body = -1;
  };
  struct Node {
    Formula::Op op = Formula::Op::Top;
    int color = 0;
    int a = -1, b = -1;
    std::vector<Term> terms, one;
    std::vector<TwoTerm> two;
    long delta = 0;
  };
  std::vector<Node> nodes;
};

bool int_lambda(const Rational& q, long& out) {
  if (q.get_den() != 1) return false;
  return fits(q.get_num(), out);
}

std::optional<FastFormula> compile_formula(const FormulaPtr& root) {
  FastFormula f;
  std::map<const Formula*, int> memo;
  std::vector<FormulaPtr> stack{root};
  while (!stack.empty()) {
    FormulaPtr cur = stack.back();
    if (memo.count(cur.get())) {
      stack.pop_back();
      continue;
    }
    std::vector<FormulaPtr> pending;
    auto need = [&](const FormulaPtr& ch) {
      if (ch && !memo.count(ch.get())) pending.push_back(ch);
    };
    need(cur->left);
    need(cur->right);
    for (const auto& t : cur->terms) need(t.body);
    for (const auto& t : cur->two_hop) need(t.body);
    for (const auto& t : cur->one_hop) need(t.body);
    if (!pending.empty()) {
      stack.insert(stack.end(), pending.begin(), pending.end());
      continue;
    }
    stack.pop_back();

    FastFormula::Node n;
    n.op = cur->op;
    n.color = cur->color;
    if (cur->left) n.a = memo.at(cur->left.get());
    if (cur->right) n.b = memo.at(cur->right.get());
    if (cur->op == Formula::Op::Pres || cur->op == Formula::Op::TwoHop) {
      if (cur->cmp != Cmp::Ge) return std::nullopt;
      if (!int_lambda(cur->delta, n.delta)) return std::nullopt;
      for (const auto& t : cur->terms) {
        FastFormula::Term ft;
        if (!int_lambda(t.lambda, ft.lambda)) return std::nullopt;
        ft.guard = t.guard;
        ft.body = memo.at(t.body.get());
        n.terms.push_back(ft);
      }
      for (const auto& t : cur->one_hop) {
        FastFormula::Term ft;
        if (!int_lambda(t.lambda, ft.lambda)) return std::nullopt;
        ft.guard = t.guard;
        ft.body = memo.at(t.body.get());
        n.one.push_back(ft);
      }
      for (const auto& t : cur->two_hop) {
        FastFormula::TwoTerm ft;
        if (!int_lambda(t.lambda, ft.lambda)) return std::nullopt;
        ft.h1 = t.hop1_out;
        ft.h2 = t.hop2_out;
        ft.body = memo.at(t.body.get());
        n.two.push_back(ft);
      }
    }
    memo[cur.get()] = (int)f.nodes.size();
    f.nodes.push_back(std::move(n));
  }
  return f;
}

std::optional<std::vector<char>> eval_fast(const FastFormula& f, const Graph& g) {
  std::vector<std::vector<int>> out_adj(g.n), in_adj(g.n);
  for (const auto& [u, v] : g.edges) {
    out_adj[u].push_back(v);
    in_adj[v].push_back(u);
  }
  std::vector<std::vector<char>> vals(f.nodes.size());
  std::vector<long> acc(g.n), cnt(g.n), mid(g.n);

  // lambda * per-vertex count added into acc, one guarded term at a time.
  auto add_counts = [&](long lambda) {
    for (int v = 0; v < g.n; ++v) {
      long t;
      if (!omul(lambda, cnt[v], t) || !oadd(acc[v], t, acc[v])) return false;
    }
    return true;
  };
  auto one_hop_counts = [&](const std::vector<char>& body, Guard guard) {
    if (guard == Guard::Top) {
      long total = 0;
      for (int u = 0; u < g.n; ++u) total += body[u];
      for (int v = 0; v < g.n; ++v) cnt[v] = total;
      return;
    }
    const auto& adj = guard == Guard::Out ? out_adj : in_adj;
    for (int v = 0; v < g.n; ++v) {
      cnt[v] = 0;
      for (int u : adj[v]) cnt[v] += body[u];
    }
  };

  for (std::size_t i = 0; i < f.nodes.size(); ++i) {
    const auto& n = f.nodes[i];
    auto& out = vals[i];
    out.assign(g.n, 0);
    switch (n.op) {
      case Formula::Op::Top:
        out.assign(g.n, 1);
        break;
      case Formula::Op::Color:
        for (int v : g.colors[n.color]) out[v] = 1;
        break;
      case Formula::Op::Not:
        for (int v = 0; v < g.n; ++v) out[v] = !vals[n.a][v];
        break;
      case Formula::Op::And:
        for (int v = 0; v < g.n; ++v) out[v] = vals[n.a][v] && vals[n.b][v];
        break;
      case Formula::Op::Pres:
        acc.assign(g.n, 0);
        for (const auto& t : n.terms) {
          one_hop_counts(vals[t.body], t.guard);
          if (!add_counts(t.lambda)) return std::nullopt;
        }
        for (int v = 0; v < g.n; ++v) out[v] = acc[v] >= n.delta;
        break;
      case Formula::Op::TwoHop:
        acc.assign(g.n, 0);
        for (const auto& t : n.two) {
          const auto& body = vals[t.body];
          const auto& hop2 = t.h2 ? out_adj : in_adj;
          for (int z = 0; z < g.n; ++z) {
            mid[z] = 0;
            for (int u : hop2[z]) mid[z] += body[u];
          }
          const auto& hop1 = t.h1 ? out_adj : in_adj;
          for (int v = 0; v < g.n; ++v) {
            cnt[v] = 0;
            for (int z : hop1[v]) cnt[v] += mid[z];
          }
          if (!add_counts(t.lambda)) return std::nullopt;
        }
        for (const auto& t : n.one) {
          one_hop_counts(vals[t.body], t.guard);
          if (!add_counts(t.lambda)) return std::nullopt;
        }
        for (int v = 0; v < g.n; ++v) out[v] = acc[v] >= n.delta;
        break;
    }
  }
  return vals.back();
}

}  // namespace

struct Acceptor::Impl {
  bool is_gnn = false;
  ForwardPlan plan;
  std::optional<FixedPointGnn> fast_gnn;
  FormulaPtr formula;
  std::optional<FastFormula> fast_formula;
};

Acceptor::Acceptor(const SpecOrFormula& spec) : impl_(new Impl) {
  if (const auto* gnn = std::get_if<GnnSpec>(&spec)) {
    impl_->is_gnn = true;
    impl_->plan = make_forward_plan(*gnn);
    impl_->fast_gnn = FixedPointGnn::compile(*gnn);
  } else {
    impl_->formula = std::get<FormulaPtr>(spec);
    impl_->fast_formula = compile_formula(normalize_ge(impl_->formula));
  }
}

Acceptor::~Acceptor() = default;
Acceptor::Acceptor(Acceptor&&) noexcept = default;
Acceptor& Acceptor::operator=(Acceptor&&) noexcept = default;

std::vector<char> Acceptor::operator()(const Graph& g) const {
  if (impl_->is_gnn) {
    if (impl_->fast_gnn) {
      if (auto acc = impl_->fast_gnn->accepted(g)) return *acc;
    }
    auto table = forward(impl_->plan, g);
    std::vector<char> out(g.n, 0);
    for (int v = 0; v < g.n; ++v) out[v] = accepts_feature(table.back()[v]);
    return out;
  }
  if (impl_->fast_formula) {
    if (auto acc = eval_fast(*impl_->fast_formula, g)) return *acc;
  }
  return eval_all(impl_->formula, g);
}

BruteResult brute_sat(const SpecOrFormula& spec, const EnumConfig& cfg) {
  BruteResult result;
  result.max_vertices = cfg.max_vertices;
  Acceptor accept(spec);
  enumerate_graphs(cfg, [&](const Graph& g) {
    auto acc = accept(g);
    for (int v = 0; v < g.n; ++v)
      if (acc[v]) {
        result.found = true;
        result.graph = g;
        result.vertex = v;
        return false;
      }
    return true;
  });
  return result;
}

BruteResult brute_universal_sat(const SpecOrFormula& spec, const EnumConfig& cfg) {
  BruteResult result;
  result.max_vertices = cfg.max_vertices;
  Acceptor accept(spec);
  enumerate_graphs(cfg, [&](const Graph& g) {
    auto acc = accept(g);
    for (int v = 0; v < g.n; ++v)
      if (!acc[v]) return true;
    result.found = true;
    result.graph = g;
    return false;
  });
  return result;
}

EquivResult equivalence_check(const SpecOrFormula& a, const SpecOrFormula& b,
                              const EnumConfig& cfg) {
  EquivResult result;
  Acceptor accept_a(a), accept_b(b);
  enumerate_graphs(cfg, [&](const Graph& g) {
    auto acc_a = accept_a(g);
    auto acc_b = accept_b(g);
    for (int v = 0; v < g.n; ++v)
      if (acc_a[v] != acc_b[v]) {
        result.equivalent = false;
        result.graph = g;
        result.vertex = v;
        return false;
      }
    return true;
  });
  return result;
}

// All random draws go through rng() directly so that a fixed seed gives the
// same sequence everywhere; the standard distributions are not portable.
namespace {

long draw(std::mt19937_64& rng, long lo, long hi) {
  return lo + (long)(rng() % (unsigned long)(hi - lo + 1));
}

Rational draw_rational(std::mt19937_64& rng, long num_span, long max_den) {
  Rational q((long)draw(rng, -num_span, num_span), (long)draw(rng, 1, max_den));
  q.canonicalize();
  return q;
}

Activation draw_activation(std::mt19937_64& rng, bool trrelu_only) {
  if (trrelu_only || draw(rng, 0, 2) == 0) return Activation::trrelu();
  // A random clamp: flat left of t_l, affine in the middle, flat from t_r on.
  Rational tl = draw_rational(rng, 2, 2);
  Rational tr = tl + Rational((long)draw(rng, 1, 2), (long)draw(rng, 1, 2));
  Activation a;
  a.pieces.push_back({tl, Rational(0), draw_rational(rng, 1, 2)});
  a.pieces.push_back({tr, draw_rational(rng, 2, 2), draw_rational(rng, 1, 2)});
  a.pieces.push_back({std::nullopt, Rational(0), draw_rational(rng, 1, 2)});
  a.validate();
  return a;
}

}  // namespace

Graph RandomSuite::graph(int max_vertices, int n_colors, bool undirected) {
  int n = (int)draw(rng, 1, max_vertices);
  Graph g(n_colors, n);
  g.undirected = undirected;
  for (int u = 0; u < n; ++u)
    for (int v = undirected ? u : 0; v < n; ++v)
      if (draw(rng, 0, 1)) g.add_edge(u, v);
  for (int c = 0; c < n_colors; ++c)
    for (int v = 0; v < n; ++v)
      if (draw(rng, 0, 1)) g.colors[c].insert(v);
  return g;
}

GnnSpec RandomSuite::gnn(const RandomGnnOptions& opt) {
  GnnSpec g;
  g.n_colors = opt.n_colors;
  int n_layers = (int)draw(rng, 1, opt.max_layers);
  int prev = opt.n_colors;
  for (int l = 0; l < n_layers; ++l) {
    Layer layer;
    layer.dim = (int)draw(rng, 1, opt.max_dim);
    layer.act = draw_activation(rng, opt.trrelu_only);
    auto mat = [&](bool enabled) {
      Mat m(layer.dim, zero_vec(prev));
      if (enabled)
        for (auto& row : m)
          for (auto& x : row) x = draw_rational(rng, 2, opt.max_denominator);
      return m;
    };
    layer.C = mat(true);
    layer.A_out = mat(true);
    layer.A_in = mat(!opt.outgoing_only);
    layer.R = mat(!opt.local);
    layer.b = zero_vec(layer.dim);
    for (auto& x : layer.b) x = draw_rational(rng, 2, opt.max_denominator);
    prev = layer.dim;
    g.layers.push_back(std::move(layer));
  }
  g.validate();
  return g;
}

FormulaPtr RandomSuite::formula(const RandomFormulaOptions& opt) {
  std::vector<Guard> guards = {Guard::Out};
  if (!opt.outgoing_only) guards.push_back(Guard::In);
  if (!opt.local) guards.push_back(Guard::Top);
  const Cmp cmps[] = {Cmp::Ge, Cmp::Le, Cmp::Eq, Cmp::Ne, Cmp::Gt, Cmp::Lt};

  std::function<FormulaPtr(int)> gen = [&](int depth) -> FormulaPtr {
    long pick = (depth <= 0) ? draw(rng, 0, 1) : draw(rng, 0, 5);
    switch (pick) {
      case 0:
        return f_top();
      case 1:
        return opt.n_colors > 0 ? f_color((int)draw(rng, 0, opt.n_colors - 1)) : f_top();
      case 2:
        return f_not(gen(depth - 1));
      case 3:
        return f_and(gen(depth - 1), gen(depth - 1));
      default: {
        std::vector<PresTerm> terms;
        int n_terms = (int)draw(rng, 1, 2);
        for (int t = 0; t < n_terms; ++t) {
          Rational lambda = 0;
          while (lambda == 0) lambda = draw_rational(rng, 2, 2);
          terms.push_back(
              PresTerm{lambda, guards[draw(rng, 0, (long)guards.size() - 1)],
                       gen(depth - 1)});
        }
        Cmp cmp = cmps[draw(rng, 0, 5)];
        return f_pres(std::move(terms), cmp, draw_rational(rng, 2, 2));
      }
    }
  };
  return gen(opt.max_depth);
}

}  // namespace gnnv
