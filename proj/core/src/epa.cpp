#include "gnnv/epa.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "gnnv/errors.hpp"
#include "gnnv/spectrum.hpp"

namespace gnnv {

EpaPtr e_true() { return std::make_shared<EpaFormula>(EpaFormula{EpaFormula::Op::LinGe}); }

EpaPtr e_linge(std::vector<LinRow> rows) {
  EpaFormula f;
  f.op = EpaFormula::Op::LinGe;
  f.rows = std::move(rows);
  return std::make_shared<EpaFormula>(std::move(f));
}

EpaPtr e_ge(LinComb coeffs, Integer rhs) {
  return e_linge({LinRow{std::move(coeffs), std::move(rhs)}});
}

EpaPtr e_eq(LinComb coeffs, Integer rhs) {
  LinComb neg;
  for (const auto& [v, c] : coeffs) neg[v] = -c;
  return e_linge({LinRow{std::move(coeffs), rhs}, LinRow{std::move(neg), -rhs}});
}

EpaPtr e_and(EpaPtr a, EpaPtr b) {
  EpaFormula f;
  f.op = EpaFormula::Op::And;
  f.left = std::move(a);
  f.right = std::move(b);
  return std::make_shared<EpaFormula>(std::move(f));
}

EpaPtr e_and(std::vector<EpaPtr> parts) {
  if (parts.empty()) return e_true();
  EpaPtr acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = e_and(acc, parts[i]);
  return acc;
}

EpaPtr e_or(EpaPtr a, EpaPtr b) {
  EpaFormula f;
  f.op = EpaFormula::Op::Or;
  f.left = std::move(a);
  f.right = std::move(b);
  return std::make_shared<EpaFormula>(std::move(f));
}

EpaPtr e_or(std::vector<EpaPtr> parts) {
  if (parts.empty()) throw std::invalid_argument("empty disjunction");
  EpaPtr acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = e_or(acc, parts[i]);
  return acc;
}

EpaPtr e_exists(std::vector<std::string> vars, EpaPtr sub) {
  if (vars.empty()) return sub;
  EpaFormula f;
  f.op = EpaFormula::Op::Exists;
  f.bound = std::move(vars);
  f.sub = std::move(sub);
  return std::make_shared<EpaFormula>(std::move(f));
}

EpaPtr e_star(EpaPtr sub) {
  EpaFormula f;
  f.op = EpaFormula::Op::Star;
  f.sub = std::move(sub);
  return std::make_shared<EpaFormula>(std::move(f));
}

int star_height(const EpaPtr& phi) {
  switch (phi->op) {
    case EpaFormula::Op::LinGe:
      return 0;
    case EpaFormula::Op::And:
    case EpaFormula::Op::Or:
      return std::max(star_height(phi->left), star_height(phi->right));
    case EpaFormula::Op::Exists:
      return star_height(phi->sub);
    case EpaFormula::Op::Star:
      return 1 + star_height(phi->sub);
  }
  return 0;
}

namespace {

void collect_free(const EpaPtr& phi, std::set<std::string>& out,
                  std::set<std::string> bound) {
  switch (phi->op) {
    case EpaFormula::Op::LinGe:
      for (const auto& row : phi->rows) {
        for (const auto& [v, c] : row.coeffs) {
          if (c != 0 && !bound.count(v)) out.insert(v);
        }
      }
      break;
    case EpaFormula::Op::And:
    case EpaFormula::Op::Or:
      collect_free(phi->left, out, bound);
      collect_free(phi->right, out, bound);
      break;
    case EpaFormula::Op::Exists:
      for (const auto& v : phi->bound) bound.insert(v);
      collect_free(phi->sub, out, bound);
      break;
    case EpaFormula::Op::Star:
      collect_free(phi->sub, out, bound);
      break;
  }
}

Integer value_of(const EpaAssignment& sigma, const std::string& v) {
  auto it = sigma.find(v);
  return it == sigma.end() ? Integer(0) : it->second;
}

bool rows_hold(const std::vector<LinRow>& rows, const EpaAssignment& sigma) {
  for (const auto& row : rows) {
    Integer sum = 0;
    for (const auto& [v, c] : row.coeffs) sum += c * value_of(sigma, v);
    if (sum < row.rhs) return false;
  }
  return true;
}

}  // namespace

std::set<std::string> free_vars(const EpaPtr& phi) {
  std::set<std::string> out;
  collect_free(phi, out, {});
  return out;
}

bool verify_epa_witness(const EpaPtr& phi, const EpaAssignment& sigma,
                        const EpaWitnessPtr& w) {
  if (!w) return false;
  switch (phi->op) {
    case EpaFormula::Op::LinGe:
      return rows_hold(phi->rows, sigma);
    case EpaFormula::Op::And:
      return verify_epa_witness(phi->left, sigma, w->left) &&
             verify_epa_witness(phi->right, sigma, w->right);
    case EpaFormula::Op::Or:
      return verify_epa_witness(w->or_branch == 0 ? phi->left : phi->right, sigma, w->sub);
    case EpaFormula::Op::Exists: {
      EpaAssignment inner = sigma;
      for (const auto& v : phi->bound) inner[v] = value_of(w->exists_values, v);
      return verify_epa_witness(phi->sub, inner, w->sub);
    }
    case EpaFormula::Op::Star: {
      std::set<std::string> vars = free_vars(phi->sub);
      EpaAssignment total;
      for (const auto& v : vars) total[v] = 0;
      for (const auto& [a, sw] : w->summands) {
        EpaAssignment summand = sigma;
        for (const auto& v : vars) {
          Integer val = value_of(a, v);
          summand[v] = val;
          total[v] += val;
        }
        if (!verify_epa_witness(phi->sub, summand, sw)) return false;
      }
      for (const auto& v : vars) {
        if (total[v] != value_of(sigma, v)) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

struct Searcher {
  const EpaBounds& bounds;
  long budget;
  long magnitude;

  explicit Searcher(const EpaBounds& b, long mag)
      : bounds(b), budget(b.budget), magnitude(mag) {}

  void spend() {
    if (budget-- <= 0) throw ResourceLimitError("search budget exhausted");
  }

  // Canonical value order 0, 1, -1, 2, -2, ...
  Integer nth_value(long i) const { return i % 2 == 0 ? Integer(i / 2) : Integer(-(i - 1) / 2); }

  EpaWitnessPtr search(const EpaPtr& phi, EpaAssignment& sigma) {
    spend();
    switch (phi->op) {
      case EpaFormula::Op::LinGe:
        return rows_hold(phi->rows, sigma) ? std::make_shared<EpaWitness>() : nullptr;
      case EpaFormula::Op::And: {
        EpaWitnessPtr l = search(phi->left, sigma);
        if (!l) return nullptr;
        EpaWitnessPtr r = search(phi->right, sigma);
        if (!r) return nullptr;
        auto w = std::make_shared<EpaWitness>();
        w->left = l;
        w->right = r;
        return w;
      }
      case EpaFormula::Op::Or: {
        for (int branch = 0; branch < 2; ++branch) {
          EpaWitnessPtr s = search(branch == 0 ? phi->left : phi->right, sigma);
          if (s) {
            auto w = std::make_shared<EpaWitness>();
            w->or_branch = branch;
            w->sub = s;
            return w;
          }
        }
        return nullptr;
      }
      case EpaFormula::Op::Exists:
        return enumerate_vars(phi, sigma, 0, std::make_shared<EpaWitness>());
      case EpaFormula::Op::Star: {
        std::set<std::string> fv = free_vars(phi->sub);
        std::vector<std::string> vars(fv.begin(), fv.end());
        EpaAssignment target;
        for (const auto& v : vars) target[v] = value_of(sigma, v);
        std::vector<std::pair<EpaAssignment, EpaWitnessPtr>> summands;
        if (!star_search(phi->sub, vars, target, bounds.max_summands, sigma, summands)) {
          return nullptr;
        }
        auto w = std::make_shared<EpaWitness>();
        w->summands = std::move(summands);
        return w;
      }
    }
    return nullptr;
  }

  EpaWitnessPtr enumerate_vars(const EpaPtr& phi, EpaAssignment& sigma, std::size_t i,
                               std::shared_ptr<EpaWitness> w) {
    if (i == phi->bound.size()) {
      EpaWitnessPtr s = search(phi->sub, sigma);
      if (!s) return nullptr;
      auto out = std::make_shared<EpaWitness>(*w);
      out->sub = s;
      return out;
    }
    const std::string& v = phi->bound[i];
    auto old = sigma.find(v) == sigma.end() ? std::optional<Integer>{}
                                            : std::optional<Integer>{sigma[v]};
    for (long k = 1; k <= 2 * magnitude + 1; ++k) {
      spend();
      Integer val = nth_value(k);
      sigma[v] = val;
      w->exists_values[v] = val;
      if (auto out = enumerate_vars(phi, sigma, i + 1, w)) {
        if (old) {
          sigma[v] = *old;
        } else {
          sigma.erase(v);
        }
        return out;
      }
    }
    if (old) {
      sigma[v] = *old;
    } else {
      sigma.erase(v);
    }
    return nullptr;
  }

  bool star_search(const EpaPtr& sub, const std::vector<std::string>& vars,
                   const EpaAssignment& target, int summands_left, EpaAssignment& sigma,
                   std::vector<std::pair<EpaAssignment, EpaWitnessPtr>>& out) {
    bool zero = true;
    for (const auto& [v, val] : target) zero = zero && val == 0;
    if (zero) return true;  // the empty sum
    if (summands_left == 0) return false;

    EpaAssignment summand;
    return summand_values(sub, vars, target, summands_left, sigma, out, summand, 0);
  }

  bool summand_values(const EpaPtr& sub, const std::vector<std::string>& vars,
                      const EpaAssignment& target, int summands_left, EpaAssignment& sigma,
                      std::vector<std::pair<EpaAssignment, EpaWitnessPtr>>& out,
                      EpaAssignment& summand, std::size_t i) {
    if (i == vars.size()) {
      // Evaluate the summand, then recurse on the remaining target.
      EpaAssignment saved = sigma;
      for (const auto& v : vars) sigma[v] = summand[v];
      EpaWitnessPtr w = search(sub, sigma);
      sigma = saved;
      if (!w) return false;
      EpaAssignment rest;
      for (const auto& v : vars) rest[v] = value_of(target, v) - summand[v];
      out.push_back({summand, w});
      if (star_search(sub, vars, rest, summands_left - 1, sigma, out)) return true;
      out.pop_back();
      return false;
    }
    for (long k = 1; k <= 2 * magnitude + 1; ++k) {
      spend();
      summand[vars[i]] = nth_value(k);
      if (summand_values(sub, vars, target, summands_left, sigma, out, summand, i + 1)) {
        return true;
      }
    }
    return false;
  }
};

}  // namespace

std::optional<EpaWitnessPtr> check_epa(const EpaPtr& phi, const EpaAssignment& sigma,
                                       const EpaBounds& bounds) {
  Searcher s(bounds, bounds.max_magnitude);
  EpaAssignment work = sigma;
  EpaWitnessPtr w = s.search(phi, work);
  if (!w) return std::nullopt;
  return w;
}

EpaSatResult sat_epa_bounded(const EpaPtr& phi, const EpaBounds& bounds) {
  EpaSatResult res;
  std::set<std::string> fv_set = free_vars(phi);
  std::vector<std::string> fv(fv_set.begin(), fv_set.end());
  for (long mag = 1; mag <= bounds.max_magnitude; ++mag) {
    try {
      Searcher s(bounds, mag);
      // Free variables behave like an outermost existential block.
      EpaPtr closed = e_exists(fv, phi);
      EpaAssignment sigma;
      EpaWitnessPtr w = s.search(closed, sigma);
      if (w) {
        if (!fv.empty()) {
          res.assignment = w->exists_values;
          w = w->sub;
        }
        res.sat = true;
        res.witness = w;
        return res;
      }
    } catch (const ResourceLimitError&) {
      return res;  // unknown at these bounds
    }
  }
  return res;
}

namespace {

bool star_free(const EpaPtr& phi) { return star_height(phi) == 0; }

bool qf_normal_form(const EpaPtr& phi) {
  if (star_free(phi)) return true;
  if (phi->op == EpaFormula::Op::Star) return qf_normal_form(phi->sub);
  if (phi->op == EpaFormula::Op::And) {
    return star_free(phi->left) && phi->right->op == EpaFormula::Op::Star &&
           qf_normal_form(phi->right->sub);
  }
  return false;
}

struct NormalFormBuilder {
  long fresh_counter = 0;

  std::string fresh(const std::string& base) {
    return "nf" + std::to_string(fresh_counter++) + "." + base;
  }

  EpaPtr rename(const EpaPtr& phi, const std::map<std::string, std::string>& ren) {
    switch (phi->op) {
      case EpaFormula::Op::LinGe: {
        std::vector<LinRow> rows;
        for (const auto& row : phi->rows) {
          LinRow r;
          r.rhs = row.rhs;
          for (const auto& [v, c] : row.coeffs) {
            auto it = ren.find(v);
            r.coeffs[it == ren.end() ? v : it->second] += c;
          }
          rows.push_back(std::move(r));
        }
        return e_linge(std::move(rows));
      }
      case EpaFormula::Op::And:
        return e_and(rename(phi->left, ren), rename(phi->right, ren));
      case EpaFormula::Op::Or:
        return e_or(rename(phi->left, ren), rename(phi->right, ren));
      case EpaFormula::Op::Exists: {
        std::map<std::string, std::string> inner = ren;
        for (const auto& v : phi->bound) inner.erase(v);
        return e_exists(phi->bound, rename(phi->sub, inner));
      }
      case EpaFormula::Op::Star:
        return e_star(rename(phi->sub, ren));
    }
    return phi;
  }

  // Pulls every existential quantifier to the front, renaming bound
  // variables apart. For stars this uses Star(Exists y phi) = Exists y
  // Star(phi) over the extended summand tuple.
  EpaPtr prenex(const EpaPtr& phi, std::vector<std::string>& bound) {
    switch (phi->op) {
      case EpaFormula::Op::LinGe:
        return phi;
      case EpaFormula::Op::And:
        return e_and(prenex(phi->left, bound), prenex(phi->right, bound));
      case EpaFormula::Op::Or:
        return e_or(prenex(phi->left, bound), prenex(phi->right, bound));
      case EpaFormula::Op::Exists: {
        std::map<std::string, std::string> ren;
        for (const auto& v : phi->bound) {
          std::string f = fresh(v);
          ren[v] = f;
          bound.push_back(f);
        }
        return prenex(rename(phi->sub, ren), bound);
      }
      case EpaFormula::Op::Star:
        return e_star(prenex(phi->sub, bound));
    }
    return phi;
  }

  void maximal_stars(const EpaPtr& phi, std::vector<EpaPtr>& out) {
    switch (phi->op) {
      case EpaFormula::Op::LinGe:
        break;
      case EpaFormula::Op::And:
      case EpaFormula::Op::Or:
        maximal_stars(phi->left, out);
        maximal_stars(phi->right, out);
        break;
      case EpaFormula::Op::Star:
        out.push_back(phi);
        break;
      case EpaFormula::Op::Exists:
        maximal_stars(phi->sub, out);
        break;
    }
  }

  // Replaces each maximal star occurrence (in left-to-right order) by the
  // equality between its free variables and the fresh copies.
  EpaPtr strip_stars(const EpaPtr& phi,
                     const std::vector<std::map<std::string, std::string>>& copies,
                     std::size_t& next) {
    switch (phi->op) {
      case EpaFormula::Op::LinGe:
        return phi;
      case EpaFormula::Op::And:
        return e_and(strip_stars(phi->left, copies, next),
                     strip_stars(phi->right, copies, next));
      case EpaFormula::Op::Or:
        return e_or(strip_stars(phi->left, copies, next),
                    strip_stars(phi->right, copies, next));
      case EpaFormula::Op::Star: {
        const auto& copy = copies[next++];
        std::vector<EpaPtr> eqs;
        for (const auto& [orig, freshv] : copy) {
          eqs.push_back(e_eq({{orig, 1}, {freshv, -1}}, 0));
        }
        return e_and(std::move(eqs));
      }
      case EpaFormula::Op::Exists:
        return e_exists(phi->bound, strip_stars(phi->sub, copies, next));
    }
    return phi;
  }

  // Quantifier-free input; output is (bound variables, quantifier-free
  // normal-form body).
  std::pair<std::vector<std::string>, EpaPtr> nf_qf(const EpaPtr& phi) {
    if (star_free(phi)) return {{}, phi};

    std::vector<EpaPtr> stars;
    maximal_stars(phi, stars);
    std::vector<std::map<std::string, std::string>> copies;
    std::vector<std::string> bound;
    for (const EpaPtr& s : stars) {
      std::map<std::string, std::string> copy;
      for (const auto& v : free_vars(s->sub)) {
        copy[v] = fresh(v);
        bound.push_back(copy[v]);
      }
      copies.push_back(std::move(copy));
    }

    std::size_t next = 0;
    EpaPtr psi1 = strip_stars(phi, copies, next);

    // Each merged-star summand satisfies, per original star, either "its
    // block is zero" or the renamed starred subformula.
    std::vector<EpaPtr> parts;
    for (std::size_t i = 0; i < stars.size(); ++i) {
      std::map<std::string, std::string> ren;
      std::vector<EpaPtr> zeros;
      for (const auto& [orig, freshv] : copies[i]) {
        ren[orig] = freshv;
        zeros.push_back(e_eq({{freshv, 1}}, 0));
      }
      EpaPtr renamed = rename(stars[i]->sub, ren);
      parts.push_back(zeros.empty() ? e_true() : e_or(e_and(std::move(zeros)), renamed));
    }
    EpaPtr psi2 = e_and(std::move(parts));

    // psi2 may still contain stars (and freshly introduced quantifiers after
    // renaming are impossible here since the input was quantifier-free).
    auto [inner_bound, inner_nf] = nf_qf(psi2);
    for (const auto& v : inner_bound) bound.push_back(v);
    return {std::move(bound), e_and(psi1, e_star(inner_nf))};
  }
};

}  // namespace

bool epa_in_normal_form(const EpaPtr& phi) {
  EpaPtr p = phi;
  while (p->op == EpaFormula::Op::Exists) p = p->sub;
  return qf_normal_form(p);
}

EpaPtr to_normal_form(const EpaPtr& phi) {
  NormalFormBuilder b;
  std::vector<std::string> bound;
  EpaPtr qf = b.prenex(phi, bound);
  auto [inner, body] = b.nf_qf(qf);
  for (const auto& v : inner) bound.push_back(v);
  return e_exists(bound, body);
}

EpaPtr characteristic_formula(const Activation& f, const Integer& d, const std::string& x,
                              const std::string& y) {
  std::vector<EpaPtr> pieces;
  std::optional<Rational> lower;
  for (const Piece& p : f.pieces) {
    std::vector<EpaPtr> conds;
    if (lower) {
      conds.push_back(e_ge({{x, 1}}, rational_ceil(Rational(d) * *lower)));
    }
    if (p.upto) {
      conds.push_back(e_ge({{x, -1}}, -(rational_ceil(Rational(d) * *p.upto) - 1)));
    }
    // y = slope * x + d * intercept, cleared to integers.
    Rational rhs_c = Rational(d) * p.intercept;
    Integer l = lcm(p.slope.get_den(), rhs_c.get_den());
    LinComb eq{{y, l}, {x, -Rational(p.slope * l).get_num()}};
    conds.push_back(e_eq(std::move(eq), Rational(rhs_c * l).get_num()));
    pieces.push_back(e_and(std::move(conds)));
    lower = p.upto;
  }
  return e_or(std::move(pieces));
}

namespace {

std::string var_name(const std::string& kind, int level, int t, int i) {
  return "s" + std::to_string(level) + "." + kind + std::to_string(t) + "." +
         std::to_string(i);
}

}  // namespace

HistorySpaceFormula history_space_formula(const GnnSpec& gnn) {
  gnn.validate();
  if (!gnn.local() || !gnn.outgoing_only()) {
    throw std::invalid_argument("the history-space formula needs an outgoing-only local GNN");
  }
  // Features after t layers have denominators dividing the product of the
  // per-layer denominators, so this single scale clears every variable.
  Integer d = 1;
  for (const Layer& lay : gnn.layers) d *= layer_coefficient_denominator(lay);

  // Builds the level-l formula over the given x blocks; `depth` makes bound
  // variable names of nested instances distinct.
  std::function<HistorySpaceFormula(int, const std::vector<std::vector<std::string>>&, int)>
      build = [&](int l, const std::vector<std::vector<std::string>>& x,
                  int depth) -> HistorySpaceFormula {
    HistorySpaceFormula out;
    out.d = d;
    out.x_vars = x;

    // Scaled color indicators: every entry is 0 or d.
    std::vector<EpaPtr> init;
    for (int i = 0; i < gnn.n_colors; ++i) {
      init.push_back(e_or(e_eq({{x[0][i], 1}}, 0), e_eq({{x[0][i], 1}}, d)));
    }
    EpaPtr phi0 = e_and(std::move(init));
    if (l == 0) {
      out.phi = phi0;
      return out;
    }

    std::vector<std::string> bound;
    for (int t = 0; t < l; ++t) {
      std::vector<std::string> block;
      for (int i = 0; i < gnn.dim(t); ++i) block.push_back(var_name("y", depth, t, i));
      out.y_vars.push_back(block);
      for (const auto& v : block) bound.push_back(v);
    }
    for (int t = 1; t <= l; ++t) {
      std::vector<std::string> block;
      for (int i = 0; i < gnn.dim(t); ++i) block.push_back(var_name("z", depth, t, i));
      out.z_vars.push_back(block);
      for (const auto& v : block) bound.push_back(v);
    }

    std::vector<EpaPtr> parts;
    for (int t = 1; t <= l; ++t) {
      const Layer& lay = gnn.layers[t - 1];
      for (int i = 0; i < lay.dim; ++i) {
        // z^t_i = C x^{t-1} + A_out y^{t-1} + d b, cleared to integers.
        Integer l_row = 1;
        for (const auto& q : lay.C[i]) l_row = lcm(l_row, q.get_den());
        for (const auto& q : lay.A_out[i]) l_row = lcm(l_row, q.get_den());
        Rational bias = Rational(d) * lay.b[i];
        l_row = lcm(l_row, bias.get_den());
        LinComb eq{{out.z_vars[t - 1][i], l_row}};
        for (int j = 0; j < gnn.dim(t - 1); ++j) {
          Integer c = Rational(lay.C[i][j] * l_row).get_num();
          if (c != 0) eq[x[t - 1][j]] -= c;
          Integer a = Rational(lay.A_out[i][j] * l_row).get_num();
          if (a != 0) eq[out.y_vars[t - 1][j]] -= a;
        }
        parts.push_back(e_eq(std::move(eq), Rational(bias * l_row).get_num()));
        parts.push_back(
            characteristic_formula(lay.act, d, out.z_vars[t - 1][i], x[t][i]));
      }
    }
    parts.push_back(phi0);

    HistorySpaceFormula child = build(l - 1, out.y_vars, depth + 1);
    parts.push_back(e_star(child.phi));
    out.child = std::make_shared<HistorySpaceFormula>(std::move(child));
    out.phi = e_exists(std::move(bound), e_and(std::move(parts)));
    return out;
  };

  std::vector<std::vector<std::string>> x;
  for (int t = 0; t <= gnn.n_layers(); ++t) {
    std::vector<std::string> block;
    for (int i = 0; i < gnn.dim(t); ++i) block.push_back(var_name("x", 0, t, i));
    x.push_back(block);
  }
  return build(gnn.n_layers(), x, 0);
}

namespace {

// Builds a witness for a formula from a total assignment, resolving star
// nodes through the supplied callback and Or nodes by verification.
struct WitnessAssembler {
  const std::function<std::vector<std::pair<EpaAssignment, EpaWitnessPtr>>(
      const EpaFormula*)>& stars;

  EpaWitnessPtr assemble(const EpaPtr& phi, const EpaAssignment& sigma) {
    switch (phi->op) {
      case EpaFormula::Op::LinGe:
        return std::make_shared<EpaWitness>();
      case EpaFormula::Op::And: {
        auto w = std::make_shared<EpaWitness>();
        w->left = assemble(phi->left, sigma);
        w->right = assemble(phi->right, sigma);
        return w;
      }
      case EpaFormula::Op::Or: {
        for (int branch = 0; branch < 2; ++branch) {
          const EpaPtr& side = branch == 0 ? phi->left : phi->right;
          EpaWitnessPtr s = assemble(side, sigma);
          if (s && verify_epa_witness(side, sigma, s)) {
            auto w = std::make_shared<EpaWitness>();
            w->or_branch = branch;
            w->sub = s;
            return w;
          }
        }
        return nullptr;
      }
      case EpaFormula::Op::Exists: {
        auto w = std::make_shared<EpaWitness>();
        for (const auto& v : phi->bound) w->exists_values[v] = value_of(sigma, v);
        w->sub = assemble(phi->sub, sigma);
        return w->sub ? w : nullptr;
      }
      case EpaFormula::Op::Star: {
        auto w = std::make_shared<EpaWitness>();
        w->summands = stars(phi.get());
        return w;
      }
    }
    return nullptr;
  }
};

}  // namespace

std::pair<EpaAssignment, EpaWitnessPtr> history_space_witness(
    const HistorySpaceFormula& hsf, const GnnSpec& gnn, const Graph& g, int v) {
  FeatureTable ft = forward(gnn, g);
  const Integer& d = hsf.d;

  // Total assignment for one structure level at one vertex.
  std::function<EpaAssignment(const HistorySpaceFormula&, int)> assign =
      [&](const HistorySpaceFormula& h, int u) {
        EpaAssignment sigma;
        int l = (int)h.x_vars.size() - 1;
        for (int t = 0; t <= l; ++t) {
          for (int i = 0; i < gnn.dim(t); ++i) {
            sigma[h.x_vars[t][i]] = Rational(Rational(d) * ft[t][u][i]).get_num();
          }
        }
        std::vector<int> outs = g.out_neighbors(u);
        for (int t = 0; t < l; ++t) {
          for (int i = 0; i < gnn.dim(t); ++i) {
            Rational sum = 0;
            for (int w : outs) sum += ft[t][w][i];
            sigma[h.y_vars[t][i]] = Rational(Rational(d) * sum).get_num();
          }
        }
        for (int t = 1; t <= l; ++t) {
          const Layer& lay = gnn.layers[t - 1];
          Vec pre = lay.b;
          add_mat_vec(pre, lay.C, ft[t - 1][u]);
          Vec osum = zero_vec(gnn.dim(t - 1));
          for (int w : outs) {
            for (int i = 0; i < gnn.dim(t - 1); ++i) osum[i] += ft[t - 1][w][i];
          }
          add_mat_vec(pre, lay.A_out, osum);
          for (int i = 0; i < lay.dim; ++i) {
            sigma[h.z_vars[t - 1][i]] = Rational(Rational(d) * pre[i]).get_num();
          }
        }
        return sigma;
      };

  std::function<EpaWitnessPtr(const HistorySpaceFormula&, int)> make =
      [&](const HistorySpaceFormula& h, int u) -> EpaWitnessPtr {
    EpaAssignment sigma = assign(h, u);
    std::function<std::vector<std::pair<EpaAssignment, EpaWitnessPtr>>(const EpaFormula*)>
        stars = [&](const EpaFormula*) {
          std::vector<std::pair<EpaAssignment, EpaWitnessPtr>> out;
          for (int w : g.out_neighbors(u)) {
            EpaAssignment child_sigma = assign(*h.child, w);
            EpaAssignment restricted;
            for (const auto& name : free_vars(h.child->phi)) {
              restricted[name] = value_of(child_sigma, name);
            }
            out.push_back({std::move(restricted), make(*h.child, w)});
          }
          return out;
        };
    WitnessAssembler a{stars};
    return a.assemble(h.phi, sigma);
  };

  EpaAssignment top = assign(hsf, v);
  EpaAssignment restricted;
  for (const auto& name : free_vars(hsf.phi)) restricted[name] = value_of(top, name);
  return {restricted, make(hsf, v)};
}

namespace {

// Finds the (unique) star node and its witness inside an Exists/And spine.
std::pair<const EpaFormula*, const EpaWitness*> find_star(const EpaFormula* phi,
                                                          const EpaWitness* w) {
  if (!w) return {nullptr, nullptr};
  switch (phi->op) {
    case EpaFormula::Op::Star:
      return {phi, w};
    case EpaFormula::Op::Exists:
      return find_star(phi->sub.get(), w->sub.get());
    case EpaFormula::Op::And: {
      auto l = find_star(phi->left.get(), w->left.get());
      if (l.first) return l;
      return find_star(phi->right.get(), w->right.get());
    }
    case EpaFormula::Op::Or:
      return find_star(w->or_branch == 0 ? phi->left.get() : phi->right.get(),
                       w->sub.get());
    default:
      return {nullptr, nullptr};
  }
}

}  // namespace

OlSatResult decide_sat_ol(const GnnSpec& gnn, const EpaBounds& bounds) {
  OlSatResult res;
  HistorySpaceFormula hsf = history_space_formula(gnn);
  int L = gnn.n_layers();
  Integer d = hsf.d;

  // Accepting sentence: some history whose scaled final first entry passes
  // the threshold 1/2.
  EpaPtr accept = e_ge({{hsf.x_vars[L][0], 2}}, d);
  EpaPtr sentence = e_and(hsf.phi, accept);

  EpaSatResult sat = sat_epa_bounded(sentence, bounds);
  if (!sat.sat) return res;

  // Rebuild the tree: fresh roots over disjoint child trees, level by level.
  Graph tree(gnn.n_colors, 0);
  tree.n = 0;
  std::function<int(const HistorySpaceFormula&, const EpaAssignment&, const EpaFormula*,
                    const EpaWitness*)>
      build = [&](const HistorySpaceFormula& h, const EpaAssignment& sigma,
                  const EpaFormula* phi, const EpaWitness* w) -> int {
    int id = tree.n++;
    tree.colors.resize(gnn.n_colors);
    for (int c = 0; c < gnn.n_colors; ++c) {
      if (value_of(sigma, h.x_vars[0][c]) == d) tree.colors[c].insert(id);
    }
    if (h.child) {
      auto [star_phi, star_w] = find_star(phi, w);
      if (star_phi) {
        for (const auto& [a, sw] : star_w->summands) {
          int child = build(*h.child, a, h.child->phi.get(), sw.get());
          tree.add_edge(id, child);
        }
      }
    }
    return id;
  };

  // The sentence is And(phi, accept); witness left side carries phi.
  const EpaWitness* phi_w = sat.witness->left.get();
  EpaAssignment sigma = sat.assignment;
  int root = build(hsf, sigma, hsf.phi.get(), phi_w);

  if (!accepts(gnn, tree, root)) return res;  // bounds produced junk; report unknown
  res.sat = true;
  res.witness = OlTreeWitness{std::move(tree), root};
  return res;
}

}  // namespace gnnv
