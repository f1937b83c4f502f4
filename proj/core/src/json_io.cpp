#include "gnnv/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace gnnv {

namespace {

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational((long)j.get<long long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw std::invalid_argument("expected a rational (integer or \"p/q\" string)");
}

Json rational_to_json(const Rational& q) {
  return rational_to_string(q);
}

Mat mat_from_json(const Json& j, const char* name) {
  if (!j.is_array()) throw std::invalid_argument(std::string(name) + " must be a matrix");
  Mat m;
  for (const auto& row : j) {
    Vec r;
    for (const auto& cell : row) r.push_back(rational_from_json(cell));
    m.push_back(std::move(r));
  }
  return m;
}

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const auto& cell : row) r.push_back(rational_to_json(cell));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

Json graph_to_json(const Graph& g) {
  Json j;
  j["n_colors"] = g.n_colors;
  j["vertices"] = g.n;
  Json edges = Json::array();
  for (const auto& [u, v] : g.edges) edges.push_back(Json::array({u, v}));
  j["edges"] = std::move(edges);
  Json colors = Json::object();
  for (int c = 0; c < g.n_colors; ++c) {
    Json ids = Json::array();
    for (int v : g.colors[c]) ids.push_back(v);
    colors[std::to_string(c + 1)] = std::move(ids);
  }
  j["colors"] = std::move(colors);
  j["undirected"] = g.undirected;
  return j;
}

Graph graph_from_json(const Json& j) {
  Graph g(j.at("n_colors").get<int>(), j.at("vertices").get<int>());
  g.undirected = j.value("undirected", false);
  for (const auto& e : j.value("edges", Json::array())) {
    g.edges.insert({e.at(0).get<int>(), e.at(1).get<int>()});
  }
  if (j.contains("colors")) {
    for (const auto& [key, ids] : j.at("colors").items()) {
      int c = std::stoi(key) - 1;
      if (c < 0 || c >= g.n_colors) throw std::invalid_argument("color index out of range: " + key);
      for (const auto& v : ids) g.colors[c].insert(v.get<int>());
    }
  }
  g.validate();
  return g;
}

namespace {

Json activation_to_json(const Activation& a) {
  if (a == Activation::trrelu()) return "trrelu";
  if (a == Activation::relu()) return "relu";
  Json pieces = Json::array();
  for (const auto& p : a.pieces) {
    Json piece;
    piece["upto"] = p.upto ? Json(rational_to_json(*p.upto)) : Json(nullptr);
    piece["slope"] = rational_to_json(p.slope);
    piece["intercept"] = rational_to_json(p.intercept);
    pieces.push_back(std::move(piece));
  }
  Json j;
  j["pieces"] = std::move(pieces);
  return j;
}

Activation activation_from_json(const Json& j) {
  if (j.is_string()) {
    std::string name = j.get<std::string>();
    if (name == "trrelu") return Activation::trrelu();
    if (name == "relu") return Activation::relu();
    if (name == "identity") return Activation::identity();
    throw std::invalid_argument("unknown activation: " + name);
  }
  Activation a;
  for (const auto& p : j.at("pieces")) {
    Piece piece;
    if (!p.at("upto").is_null()) piece.upto = rational_from_json(p.at("upto"));
    piece.slope = rational_from_json(p.at("slope"));
    piece.intercept = rational_from_json(p.at("intercept"));
    a.pieces.push_back(std::move(piece));
  }
  a.validate();
  return a;
}

}  // namespace

Json gnn_to_json(const GnnSpec& gnn) {
  Json j;
  j["n_colors"] = gnn.n_colors;
  Json layers = Json::array();
  for (const auto& l : gnn.layers) {
    Json layer;
    layer["dim"] = l.dim;
    layer["activation"] = activation_to_json(l.act);
    layer["C"] = mat_to_json(l.C);
    layer["A_out"] = mat_to_json(l.A_out);
    layer["A_in"] = mat_to_json(l.A_in);
    layer["R"] = mat_to_json(l.R);
    Json b = Json::array();
    for (const auto& q : l.b) b.push_back(rational_to_json(q));
    layer["b"] = std::move(b);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

GnnSpec gnn_from_json(const Json& j) {
  GnnSpec gnn;
  gnn.n_colors = j.at("n_colors").get<int>();
  for (const auto& lj : j.at("layers")) {
    Layer l;
    l.dim = lj.at("dim").get<int>();
    l.act = activation_from_json(lj.at("activation"));
    l.C = mat_from_json(lj.at("C"), "C");
    l.A_out = mat_from_json(lj.at("A_out"), "A_out");
    l.A_in = mat_from_json(lj.at("A_in"), "A_in");
    l.R = mat_from_json(lj.at("R"), "R");
    for (const auto& q : lj.at("b")) l.b.push_back(rational_from_json(q));
    gnn.layers.push_back(std::move(l));
  }
  gnn.validate();
  return gnn;
}

namespace {

const char* guard_name(Guard g) {
  switch (g) {
    case Guard::Out: return "out";
    case Guard::In: return "in";
    case Guard::Top: return "top";
  }
  return "?";
}

Guard guard_from_name(const std::string& s) {
  if (s == "out") return Guard::Out;
  if (s == "in") return Guard::In;
  if (s == "top") return Guard::Top;
  throw std::invalid_argument("unknown guard: " + s);
}

const char* cmp_name(Cmp c) {
  switch (c) {
    case Cmp::Ge: return ">=";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
    case Cmp::Gt: return ">";
    case Cmp::Lt: return "<";
  }
  return "?";
}

Cmp cmp_from_name(const std::string& s) {
  if (s == ">=") return Cmp::Ge;
  if (s == "<=") return Cmp::Le;
  if (s == "=" || s == "==") return Cmp::Eq;
  if (s == "!=") return Cmp::Ne;
  if (s == ">") return Cmp::Gt;
  if (s == "<") return Cmp::Lt;
  throw std::invalid_argument("unknown comparison: " + s);
}

}  // namespace

Json formula_to_json(const FormulaPtr& phi) {
  Json j;
  switch (phi->op) {
    case Formula::Op::Top:
      j["op"] = "top";
      break;
    case Formula::Op::Color:
      j["op"] = "color";
      j["color"] = phi->color + 1;
      break;
    case Formula::Op::Not:
      j["op"] = "not";
      j["sub"] = formula_to_json(phi->left);
      break;
    case Formula::Op::And:
      j["op"] = "and";
      j["left"] = formula_to_json(phi->left);
      j["right"] = formula_to_json(phi->right);
      break;
    case Formula::Op::Pres: {
      j["op"] = "pres";
      Json terms = Json::array();
      for (const auto& t : phi->terms) {
        Json term;
        term["lambda"] = rational_to_json(t.lambda);
        term["guard"] = guard_name(t.guard);
        term["body"] = formula_to_json(t.body);
        terms.push_back(std::move(term));
      }
      j["terms"] = std::move(terms);
      j["cmp"] = cmp_name(phi->cmp);
      j["delta"] = rational_to_json(phi->delta);
      break;
    }
    case Formula::Op::TwoHop: {
      j["op"] = "twohop";
      Json terms = Json::array();
      for (const auto& t : phi->two_hop) {
        Json term;
        term["lambda"] = rational_to_json(t.lambda);
        term["hop1"] = t.hop1_out ? "out" : "in";
        term["hop2"] = t.hop2_out ? "out" : "in";
        term["body"] = formula_to_json(t.body);
        terms.push_back(std::move(term));
      }
      j["two_hop"] = std::move(terms);
      Json one = Json::array();
      for (const auto& t : phi->one_hop) {
        Json term;
        term["lambda"] = rational_to_json(t.lambda);
        term["guard"] = guard_name(t.guard);
        term["body"] = formula_to_json(t.body);
        one.push_back(std::move(term));
      }
      j["one_hop"] = std::move(one);
      j["cmp"] = cmp_name(phi->cmp);
      j["delta"] = rational_to_json(phi->delta);
      break;
    }
  }
  return j;
}

FormulaPtr formula_from_json(const Json& j) {
  std::string op = j.at("op").get<std::string>();
  if (op == "top") return f_top();
  if (op == "bot") return f_bot();
  if (op == "color") return f_color(j.at("color").get<int>() - 1);
  if (op == "not") return f_not(formula_from_json(j.at("sub")));
  if (op == "and") return f_and(formula_from_json(j.at("left")), formula_from_json(j.at("right")));
  if (op == "or") return f_or(formula_from_json(j.at("left")), formula_from_json(j.at("right")));
  if (op == "pres") {
    std::vector<PresTerm> terms;
    for (const auto& tj : j.at("terms")) {
      PresTerm t;
      t.lambda = rational_from_json(tj.at("lambda"));
      t.guard = guard_from_name(tj.at("guard").get<std::string>());
      t.body = formula_from_json(tj.at("body"));
      terms.push_back(std::move(t));
    }
    return f_pres(std::move(terms), cmp_from_name(j.at("cmp").get<std::string>()),
                  rational_from_json(j.at("delta")));
  }
  if (op == "twohop") {
    std::vector<TwoHopTerm> two_hop;
    for (const auto& tj : j.at("two_hop")) {
      TwoHopTerm t;
      t.lambda = rational_from_json(tj.at("lambda"));
      t.hop1_out = guard_from_name(tj.at("hop1").get<std::string>()) == Guard::Out;
      t.hop2_out = guard_from_name(tj.at("hop2").get<std::string>()) == Guard::Out;
      t.body = formula_from_json(tj.at("body"));
      two_hop.push_back(std::move(t));
    }
    std::vector<PresTerm> one_hop;
    for (const auto& tj : j.value("one_hop", Json::array())) {
      PresTerm t;
      t.lambda = rational_from_json(tj.at("lambda"));
      t.guard = guard_from_name(tj.at("guard").get<std::string>());
      t.body = formula_from_json(tj.at("body"));
      one_hop.push_back(std::move(t));
    }
    return f_twohop(std::move(two_hop), std::move(one_hop),
                    cmp_from_name(j.at("cmp").get<std::string>()),
                    rational_from_json(j.at("delta")));
  }
  throw std::invalid_argument("unknown formula op: " + op);
}

Json epa_to_json(const EpaPtr& phi) {
  Json j;
  switch (phi->op) {
    case EpaFormula::Op::LinGe: {
      j["op"] = "linge";
      Json rows = Json::array();
      for (const auto& r : phi->rows) {
        Json row;
        Json coeffs = Json::object();
        for (const auto& [var, c] : r.coeffs) coeffs[var] = c.get_str();
        row["coeffs"] = std::move(coeffs);
        row["rhs"] = r.rhs.get_str();
        rows.push_back(std::move(row));
      }
      j["rows"] = std::move(rows);
      break;
    }
    case EpaFormula::Op::And:
    case EpaFormula::Op::Or:
      j["op"] = phi->op == EpaFormula::Op::And ? "and" : "or";
      j["left"] = epa_to_json(phi->left);
      j["right"] = epa_to_json(phi->right);
      break;
    case EpaFormula::Op::Exists:
      j["op"] = "exists";
      j["vars"] = phi->bound;
      j["sub"] = epa_to_json(phi->sub);
      break;
    case EpaFormula::Op::Star:
      j["op"] = "star";
      j["sub"] = epa_to_json(phi->sub);
      break;
  }
  return j;
}

EpaPtr epa_from_json(const Json& j) {
  std::string op = j.at("op").get<std::string>();
  if (op == "linge") {
    std::vector<LinRow> rows;
    for (const auto& rj : j.at("rows")) {
      LinRow row;
      for (const auto& [var, c] : rj.at("coeffs").items()) {
        row.coeffs[var] = Integer(c.get<std::string>());
      }
      row.rhs = Integer(rj.at("rhs").get<std::string>());
      rows.push_back(std::move(row));
    }
    return e_linge(std::move(rows));
  }
  if (op == "and") return e_and(epa_from_json(j.at("left")), epa_from_json(j.at("right")));
  if (op == "or") return e_or(epa_from_json(j.at("left")), epa_from_json(j.at("right")));
  if (op == "exists") {
    return e_exists(j.at("vars").get<std::vector<std::string>>(), epa_from_json(j.at("sub")));
  }
  if (op == "star") return e_star(epa_from_json(j.at("sub")));
  throw std::invalid_argument("unknown EPA op: " + op);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace gnnv
