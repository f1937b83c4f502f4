// Command-line front end: evaluation, satisfiability, translations,
// spectrum reports, instance generators, and brute-force oracle checks.
// Exit codes: 0 sat/holds/equivalent, 1 unsat/no-witness/counterexample,
// 2 resource limit or unknown at the given bounds, >= 3 usage or input error.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "gnnv/epa.hpp"
#include "gnnv/errors.hpp"
#include "gnnv/json_io.hpp"
#include "gnnv/oracle.hpp"
#include "gnnv/reductions.hpp"
#include "gnnv/sat_local.hpp"
#include "gnnv/sexpr.hpp"
#include "gnnv/spectrum.hpp"
#include "gnnv/translate.hpp"

using namespace gnnv;

namespace {

struct Output {
  std::string json_out;

  int finish(Json report, int code) {
    report["exit_code"] = code;
    std::string text = report.dump(2);
    if (!json_out.empty()) {
      std::ofstream f(json_out);
      f << text << "\n";
    }
    std::cout << text << "\n";
    return code;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

GnnSpec load_gnn(const std::string& path) { return gnn_from_json(read_json_file(path)); }
Graph load_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }

FormulaPtr load_formula(const std::string& path) {
  std::string text = read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '(') return parse_formula_sexpr(text);
  return formula_from_json(Json::parse(text));
}

SpecOrFormula load_spec(const std::string& gnn_path, const std::string& formula_path) {
  if (!gnn_path.empty() && !formula_path.empty())
    throw std::invalid_argument("give either a GNN or a formula, not both");
  if (!gnn_path.empty()) return load_gnn(gnn_path);
  if (!formula_path.empty()) return load_formula(formula_path);
  throw std::invalid_argument("missing --gnn or --formula");
}

Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (const auto& q : v) out.push_back(rational_to_string(q));
  return out;
}

AlcPtr alc_from_json(const Json& j) {
  std::string op = j.at("op");
  if (op == "atom") return a_atom(j.at("atom").get<int>());
  if (op == "not") return a_not(alc_from_json(j.at("sub")));
  if (op == "and") return a_and(alc_from_json(j.at("left")), alc_from_json(j.at("right")));
  if (op == "or") return a_or(alc_from_json(j.at("left")), alc_from_json(j.at("right")));
  if (op == "exists") return a_exists(alc_from_json(j.at("sub")));
  if (op == "forall") return a_forall(alc_from_json(j.at("sub")));
  throw std::invalid_argument("alc: unknown op " + op);
}

EquationSystem eqsys_from_json(const Json& j) {
  EquationSystem eps;
  eps.n_vars = j.at("n_vars").get<int>();
  for (const auto& e : j.at("equations")) {
    Equation eq;
    std::string kind = e.at("kind");
    if (kind == "one") {
      eq.kind = Equation::Kind::One;
    } else if (kind == "sum") {
      eq.kind = Equation::Kind::Sum;
    } else if (kind == "product") {
      eq.kind = Equation::Kind::Product;
    } else {
      throw std::invalid_argument("eqsys: unknown kind " + kind);
    }
    eq.t1 = e.at("t1").get<int>();
    if (kind != "one") {
      eq.t2 = e.at("t2").get<int>();
      eq.t3 = e.at("t3").get<int>();
    }
    eps.equations.push_back(eq);
  }
  eps.validate();
  return eps;
}

TcMachine tcm_from_json(const Json& j) {
  TcMachine m;
  for (const auto& e : j.at("instructions")) {
    TcInstruction ins;
    std::string kind = e.at("kind");
    if (kind == "inc") {
      ins.kind = TcInstruction::Kind::Inc;
      ins.counter = e.at("counter").get<int>();
    } else if (kind == "ifzero") {
      ins.kind = TcInstruction::Kind::IfZero;
      ins.counter = e.at("counter").get<int>();
      ins.target = e.at("target").get<int>();
    } else if (kind == "halt") {
      ins.kind = TcInstruction::Kind::Halt;
    } else {
      throw std::invalid_argument("tcm: unknown kind " + kind);
    }
    m.instructions.push_back(ins);
  }
  m.validate();
  return m;
}

EqsysTarget eqsys_target_from(const std::string& s) {
  if (s == "og-relu") return EqsysTarget::OgRelu;
  if (s == "bl-relu") return EqsysTarget::BlRelu;
  if (s == "bl-relu-undirected") return EqsysTarget::BlReluUndirected;
  if (s == "mp2") return EqsysTarget::Mp2;
  if (s == "mp2-undirected") return EqsysTarget::Mp2Undirected;
  throw std::invalid_argument("unknown eqsys target " + s);
}

void maybe_write(const std::string& path, const Json& j) {
  if (!path.empty()) write_json_file(path, j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for aggregate-combine graph neural networks"};
  app.require_subcommand(1);
  Output out;
  app.add_option("--json-out", out.json_out, "Also write the report to this file");

  // --- eval ---------------------------------------------------------------
  std::string ev_gnn, ev_graph;
  int ev_vertex = 0;
  bool ev_features = false;
  auto* eval_cmd = app.add_subcommand("eval", "Run a GNN on a graph vertex");
  eval_cmd->add_option("--gnn", ev_gnn)->required();
  eval_cmd->add_option("--graph", ev_graph)->required();
  eval_cmd->add_option("--vertex", ev_vertex)->required();
  eval_cmd->add_flag("--features", ev_features, "Include the full feature table");

  // --- sat ----------------------------------------------------------------
  std::string sat_gnn, sat_engine = "auto";
  SatCaps sat_caps;
  EpaBounds sat_bounds;
  auto* sat_cmd = app.add_subcommand("sat", "Decide satisfiability of a GNN");
  sat_cmd->add_option("--gnn", sat_gnn)->required();
  sat_cmd->add_option("--engine", sat_engine,
                      "auto | trrelu | eventually-constant | epastar");
  sat_cmd->add_option("--history-cap", sat_caps.history_cap);
  sat_cmd->add_option("--ilp-budget", sat_caps.ilp_node_budget);
  sat_cmd->add_option("--max-summands", sat_bounds.max_summands);
  sat_cmd->add_option("--max-magnitude", sat_bounds.max_magnitude);
  sat_cmd->add_option("--epa-budget", sat_bounds.budget);

  // --- usat ---------------------------------------------------------------
  std::string us_gnn, us_formula;
  int us_max_vertices = 4;
  bool us_undirected = false;
  auto* usat_cmd =
      app.add_subcommand("usat", "Search for a graph accepted at every vertex");
  usat_cmd->add_option("--gnn", us_gnn);
  usat_cmd->add_option("--formula", us_formula);
  usat_cmd->add_option("--max-vertices", us_max_vertices);
  usat_cmd->add_flag("--undirected", us_undirected);

  // --- translate ----------------------------------------------------------
  std::string tr_from, tr_to, tr_in, tr_out;
  auto* tr_cmd = app.add_subcommand("translate", "Translate between GNNs and formulas");
  tr_cmd->add_option("--from", tr_from, "gnn | mp2")->required();
  tr_cmd->add_option("--to", tr_to, "mp2 | trrelu-gnn | relu-gnn")->required();
  tr_cmd->add_option("--in", tr_in)->required();
  tr_cmd->add_option("--out", tr_out);

  // --- spectrum -----------------------------------------------------------
  std::string sp_gnn;
  bool sp_full = false;
  long sp_cap = 1'000'000;
  auto* sp_cmd = app.add_subcommand("spectrum", "Report the spectrum overapproximation");
  sp_cmd->add_option("--gnn", sp_gnn)->required();
  sp_cmd->add_flag("--full", sp_full, "Include the value sets");
  sp_cmd->add_option("--size-cap", sp_cap);

  // --- generate -----------------------------------------------------------
  std::string gen_kind, gen_in, gen_target = "og-relu";
  std::string gen_out_gnn, gen_out_formula, gen_out_graph;
  bool gen_undirected = false;
  int gen_n1 = 3, gen_n2 = 3;
  long gen_max_steps = 10'000;
  auto* gen_cmd = app.add_subcommand("generate", "Generate hardness instances");
  gen_cmd->add_option("--kind", gen_kind, "3sat | alc | eqsys | tcm | bipolar | epa-hardness")
      ->required();
  gen_cmd->add_option("--in", gen_in, "Input file (DIMACS or JSON schema)");
  gen_cmd->add_option("--target", gen_target, "eqsys target");
  gen_cmd->add_flag("--undirected", gen_undirected);
  gen_cmd->add_option("--n1", gen_n1);
  gen_cmd->add_option("--n2", gen_n2);
  gen_cmd->add_option("--max-steps", gen_max_steps);
  gen_cmd->add_option("--out-gnn", gen_out_gnn);
  gen_cmd->add_option("--out-formula", gen_out_formula);
  gen_cmd->add_option("--out-graph", gen_out_graph);

  // --- oracle -------------------------------------------------------------
  std::string or_gnn, or_formula, or_mode = "sat";
  int or_max_vertices = 3, or_colors = -1;
  bool or_undirected = false;
  auto* or_cmd = app.add_subcommand("oracle", "Brute-force enumeration checks");
  or_cmd->add_option("--mode", or_mode, "sat | usat");
  or_cmd->add_option("--gnn", or_gnn);
  or_cmd->add_option("--formula", or_formula);
  or_cmd->add_option("--max-vertices", or_max_vertices);
  or_cmd->add_option("--colors", or_colors, "Color count (default: from input)");
  or_cmd->add_flag("--undirected", or_undirected);

  // --- check-equiv --------------------------------------------------------
  std::string eq_gnn_a, eq_formula_a, eq_gnn_b, eq_formula_b;
  int eq_max_vertices = 3, eq_colors = -1;
  bool eq_undirected = false;
  auto* eq_cmd = app.add_subcommand("check-equiv", "Exhaustive acceptance comparison");
  eq_cmd->add_option("--gnn-a", eq_gnn_a);
  eq_cmd->add_option("--formula-a", eq_formula_a);
  eq_cmd->add_option("--gnn-b", eq_gnn_b);
  eq_cmd->add_option("--formula-b", eq_formula_b);
  eq_cmd->add_option("--max-vertices", eq_max_vertices);
  eq_cmd->add_option("--colors", eq_colors);
  eq_cmd->add_flag("--undirected", eq_undirected);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? 0 : 3;
  }

  try {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&]() {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::steady_clock::now() - t0)
          .count();
    };

    if (*eval_cmd) {
      GnnSpec gnn = load_gnn(ev_gnn);
      Graph g = load_graph(ev_graph);
      if (ev_vertex < 0 || ev_vertex >= g.n)
        throw std::invalid_argument("vertex id out of range");
      auto table = forward(gnn, g);
      bool acc = accepts_feature(table.back()[ev_vertex]);
      Json rep;
      rep["verdict"] = acc ? "accept" : "reject";
      rep["value"] = rational_to_string(table.back()[ev_vertex][0]);
      if (ev_features) {
        Json layers = Json::array();
        for (const auto& layer : table) {
          Json per_vertex = Json::array();
          for (const auto& v : layer) per_vertex.push_back(vec_json(v));
          layers.push_back(per_vertex);
        }
        rep["features"] = layers;
      }
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, acc ? 0 : 1);
    }

    if (*sat_cmd) {
      GnnSpec gnn = load_gnn(sat_gnn);
      std::string engine = sat_engine;
      if (engine == "auto") {
        if (gnn.local() && gnn.all_trrelu()) {
          engine = "trrelu";
        } else if (gnn.local()) {
          engine = "eventually-constant";
        } else if (gnn.outgoing_only()) {
          engine = "epastar";
        } else {
          throw std::invalid_argument("no engine for this GNN class");
        }
      }
      Json rep;
      rep["engine"] = engine;
      if (engine == "epastar") {
        auto res = decide_sat_ol(gnn, sat_bounds);
        rep["verdict"] = res.sat ? "sat" : "no-witness-up-to";
        rep["witness"] = nullptr;
        if (res.sat && res.witness) {
          rep["witness"] = {{"graph", graph_to_json(res.witness->tree)},
                            {"vertex", res.witness->root}};
        }
        rep["stats"] = {{"wall_ms", elapsed_ms()},
                        {"max_magnitude", sat_bounds.max_magnitude},
                        {"max_summands", sat_bounds.max_summands}};
        return out.finish(rep, res.sat ? 0 : 2);
      }
      Verdict v = (engine == "trrelu") ? decide_sat(gnn, sat_caps)
                                       : decide_sat_eventually_constant(gnn, sat_caps);
      rep["verdict"] = v.kind == Verdict::Kind::Sat       ? "sat"
                       : v.kind == Verdict::Kind::Unsat   ? "unsat"
                                                          : "resource-limit";
      rep["witness"] = nullptr;
      if (v.witness) {
        rep["witness"] = {{"graph", graph_to_json(v.witness->tree)},
                          {"vertex", v.witness->root}};
      }
      if (!v.reason.empty()) rep["reason"] = v.reason;
      rep["stats"] = {{"wall_ms", elapsed_ms()},
                      {"histories", v.stats.histories},
                      {"check_calls", v.stats.check_calls},
                      {"ilp_calls", v.stats.ilp_calls}};
      int code = v.kind == Verdict::Kind::Sat ? 0 : v.kind == Verdict::Kind::Unsat ? 1 : 2;
      return out.finish(rep, code);
    }

    if (*usat_cmd) {
      auto spec = load_spec(us_gnn, us_formula);
      auto res = decide_universal_bounded(spec, us_max_vertices, us_undirected);
      Json rep;
      rep["verdict"] = res.found ? "sat" : "no-witness-up-to";
      rep["max_vertices"] = res.max_vertices;
      rep["witness"] = res.found ? Json(graph_to_json(res.graph)) : Json(nullptr);
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, res.found ? 0 : 1);
    }

    if (*tr_cmd) {
      Json rep;
      Json result;
      if (tr_from == "gnn" && tr_to == "mp2") {
        result = formula_to_json(gnn_to_mp2(load_gnn(tr_in)));
      } else if (tr_from == "mp2" && tr_to == "trrelu-gnn") {
        result = gnn_to_json(mp2_to_trrelu_gnn(load_formula(tr_in)));
      } else if (tr_from == "mp2" && tr_to == "relu-gnn") {
        result = gnn_to_json(m2p2_to_relu_gnn(load_formula(tr_in)));
      } else {
        throw std::invalid_argument("unsupported translation " + tr_from + " -> " + tr_to);
      }
      maybe_write(tr_out, result);
      rep["verdict"] = "ok";
      rep["result"] = result;
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, 0);
    }

    if (*sp_cmd) {
      GnnSpec gnn = load_gnn(sp_gnn);
      auto sp = overapprox_spectrum(gnn, sp_cap);
      Json layers = Json::array();
      for (int l = 0; l < (int)sp.entry_values.size(); ++l) {
        Json entry;
        entry["layer"] = l;
        entry["capacity"] = sp.capacity[l].get_str();
        entry["entry_value_count"] = (long)sp.entry_values[l].size();
        if (sp_full) {
          Json vals = Json::array();
          for (const auto& q : sp.entry_values[l]) vals.push_back(rational_to_string(q));
          entry["entry_values"] = vals;
        }
        layers.push_back(entry);
      }
      Json rep;
      rep["verdict"] = "ok";
      rep["layers"] = layers;
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, 0);
    }

    if (*gen_cmd) {
      Json rep;
      rep["kind"] = gen_kind;
      if (gen_kind == "3sat") {
        Cnf3 cnf = parse_dimacs(read_file(gen_in));
        GnnSpec gnn = threesat_to_gnn(cnf);
        maybe_write(gen_out_gnn, gnn_to_json(gnn));
        rep["gnn"] = gnn_to_json(gnn);
        auto sol = threesat_solve(cnf);
        rep["satisfiable"] = sol.has_value();
        if (sol) {
          Graph w = threesat_witness_graph(cnf, *sol);
          maybe_write(gen_out_graph, graph_to_json(w));
          rep["witness"] = graph_to_json(w);
        }
      } else if (gen_kind == "alc") {
        Json in = read_json_file(gen_in);
        AlcPtr c = alc_from_json(in.at("concept"));
        int n_atomic = in.at("n_atomic").get<int>();
        auto phi = alc_to_mp2(c, n_atomic, gen_undirected);
        maybe_write(gen_out_formula, formula_to_json(phi));
        rep["formula"] = formula_to_json(phi);
      } else if (gen_kind == "eqsys") {
        Json in = read_json_file(gen_in);
        EquationSystem eps = eqsys_from_json(in);
        EqsysTarget target = eqsys_target_from(gen_target);
        if (target == EqsysTarget::Mp2 || target == EqsysTarget::Mp2Undirected) {
          auto phi = eqsys_to_mp2(eps);
          maybe_write(gen_out_formula, formula_to_json(phi));
          rep["formula"] = formula_to_json(phi);
        } else {
          GnnSpec gnn = eqsys_to_gnn(eps, target);
          maybe_write(gen_out_gnn, gnn_to_json(gnn));
          rep["gnn"] = gnn_to_json(gnn);
        }
        if (in.contains("solution")) {
          std::vector<Integer> sol;
          for (const auto& v : in["solution"]) sol.push_back(Integer(v.get<std::string>()));
          auto [w, vtx] = eqsys_witness_graph(eps, sol, target);
          maybe_write(gen_out_graph, graph_to_json(w));
          rep["witness"] = graph_to_json(w);
          rep["witness_vertex"] = vtx;
        }
      } else if (gen_kind == "tcm") {
        Json in = read_json_file(gen_in);
        TcMachine m = tcm_from_json(in);
        auto phi = tcm_to_m2p2(m, gen_undirected);
        maybe_write(gen_out_formula, formula_to_json(phi));
        rep["formula"] = formula_to_json(phi);
        auto run = tcm_run(m, gen_max_steps);
        rep["halted"] = run.halted;
        if (run.halted) {
          Graph w = tcm_witness_graph(m, run, gen_undirected);
          maybe_write(gen_out_graph, graph_to_json(w));
          rep["witness"] = graph_to_json(w);
        }
      } else if (gen_kind == "bipolar") {
        Graph g = bipolar_graph(gen_n1, gen_n2, gen_undirected);
        maybe_write(gen_out_graph, graph_to_json(g));
        rep["graph"] = graph_to_json(g);
        rep["formula"] = formula_to_json(bipolar_separation_formula());
        maybe_write(gen_out_formula, formula_to_json(bipolar_separation_formula()));
      } else if (gen_kind == "epa-hardness") {
        Json in = read_json_file(gen_in);
        EpaPtr phi = epa_from_json(in.at("formula"));
        std::vector<std::string> vars;
        for (const auto& v : in.at("vars")) vars.push_back(v.get<std::string>());
        EpaPtr nf = to_normal_form(phi);
        GnnSpec gnn = epa_to_ol_relu_gnn(nf, vars);
        maybe_write(gen_out_gnn, gnn_to_json(gnn));
        rep["gnn"] = gnn_to_json(gnn);
        auto res = sat_epa_bounded(nf, EpaBounds{});
        rep["satisfiable_at_bounds"] = res.sat;
        if (res.sat) {
          Graph w = epa_hardness_witness_graph(nf, vars, res.assignment, res.witness);
          maybe_write(gen_out_graph, graph_to_json(w));
          rep["witness"] = graph_to_json(w);
        }
      } else {
        throw std::invalid_argument("unknown kind " + gen_kind);
      }
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, 0);
    }

    if (*or_cmd) {
      auto spec = load_spec(or_gnn, or_formula);
      EnumConfig cfg;
      cfg.max_vertices = or_max_vertices;
      cfg.undirected = or_undirected;
      cfg.n_colors = or_colors;
      if (cfg.n_colors < 0) {
        cfg.n_colors = std::holds_alternative<GnnSpec>(spec)
                           ? std::get<GnnSpec>(spec).n_colors
                           : formula_color_count(std::get<FormulaPtr>(spec));
      }
      BruteResult res = (or_mode == "usat") ? brute_universal_sat(spec, cfg)
                                            : brute_sat(spec, cfg);
      Json rep;
      rep["verdict"] = res.found ? "sat" : "no-witness-up-to";
      rep["max_vertices"] = res.max_vertices;
      rep["witness"] = res.found ? Json(graph_to_json(res.graph)) : Json(nullptr);
      if (res.found && or_mode != "usat") rep["vertex"] = res.vertex;
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, res.found ? 0 : 1);
    }

    if (*eq_cmd) {
      auto a = load_spec(eq_gnn_a, eq_formula_a);
      auto b = load_spec(eq_gnn_b, eq_formula_b);
      EnumConfig cfg;
      cfg.max_vertices = eq_max_vertices;
      cfg.undirected = eq_undirected;
      cfg.n_colors = eq_colors;
      if (cfg.n_colors < 0) {
        cfg.n_colors = std::holds_alternative<GnnSpec>(a)
                           ? std::get<GnnSpec>(a).n_colors
                           : formula_color_count(std::get<FormulaPtr>(a));
      }
      auto res = equivalence_check(a, b, cfg);
      Json rep;
      rep["verdict"] = res.equivalent ? "equivalent" : "counterexample";
      rep["witness"] =
          res.equivalent ? Json(nullptr) : Json(graph_to_json(res.graph));
      if (!res.equivalent) rep["vertex"] = res.vertex;
      rep["stats"] = {{"wall_ms", elapsed_ms()}};
      return out.finish(rep, res.equivalent ? 0 : 1);
    }

    throw std::invalid_argument("no subcommand");
  } catch (const ResourceLimitError& e) {
    Json rep;
    rep["verdict"] = "resource-limit";
    rep["reason"] = e.what();
    return out.finish(rep, 2);
  } catch (const std::exception& e) {
    Json rep;
    rep["verdict"] = "error";
    rep["reason"] = e.what();
    return out.finish(rep, 3);
  }
}
