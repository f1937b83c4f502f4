#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/logic.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

// Quantifier-free Presburger formulas over variables x_0..x_{k-1} with
// integer coefficients. Atoms are linear inequalities sum(coeffs . x) >= c.
struct QfPres;
using QfPresPtr = std::shared_ptr<const QfPres>;
struct QfPres {
  enum class Op { Atom, Not, And, Or };
  Op op = Op::Atom;
  std::vector<Integer> coeffs;  // Atom; variables beyond the vector read as 0
  Integer c;                    // Atom
  std::vector<QfPresPtr> subs;  // Not (one), And/Or (any number)
};

QfPresPtr q_atom(std::vector<Integer> coeffs, Integer c);
QfPresPtr q_true();                                       // 0 >= 0
QfPresPtr q_not(QfPresPtr a);
QfPresPtr q_and(std::vector<QfPresPtr> subs);
QfPresPtr q_or(std::vector<QfPresPtr> subs);
// x_i = x_j + x_k + c as a pair of atoms (pass k < 0 to drop the third term).
std::vector<QfPresPtr> q_eq_atoms(int i, int j, int k, const Integer& c, int n_vars);

int qf_depth(const QfPresPtr& phi);
bool qf_eval(const QfPresPtr& phi, const Vec& x);

// Aggregation-free ReLU layers that evaluate phi on a feature prefix: the
// first prefix_dim entries pass through unchanged (they must be nonnegative
// integers), and the final layer writes the 0/1 truth value of phi, read off
// the first entries of the prefix, into entry prefix_dim. Exactly
// 2 * qf_depth(phi) layers.
std::vector<Layer> presburger_test_layers(const QfPresPtr& phi, int prefix_dim);

// 3-CNF with exactly three literals per clause; literal k>0 means variable
// x_k, k<0 means its negation (1-based, repetition allowed).
struct Cnf3 {
  int n_vars = 0;
  std::vector<std::array<int, 3>> clauses;

  void validate() const;
  bool eval(const std::vector<bool>& assignment) const;
};

Cnf3 parse_dimacs(const std::string& text);

// Two-layer outgoing-only local trReLU GNN, satisfiable iff the formula is.
GnnSpec threesat_to_gnn(const Cnf3& phi);

// The single-vertex model of a satisfying assignment.
Graph threesat_witness_graph(const Cnf3& phi, const std::vector<bool>& assignment);

std::optional<std::vector<bool>> threesat_solve(const Cnf3& phi);

// ALC concepts over one role; atomic concepts are color indices.
struct AlcConcept;
using AlcPtr = std::shared_ptr<const AlcConcept>;
struct AlcConcept {
  enum class Op { Atom, Not, And, Or, Exists, Forall };
  Op op = Op::Atom;
  int atom = 0;
  AlcPtr left, right;  // Not/Exists/Forall use left only
};

AlcPtr a_atom(int atom);
AlcPtr a_not(AlcPtr c);
AlcPtr a_and(AlcPtr a, AlcPtr b);
AlcPtr a_or(AlcPtr a, AlcPtr b);
AlcPtr a_exists(AlcPtr c);
AlcPtr a_forall(AlcPtr c);

int alc_depth(const AlcPtr& c);  // quantifier depth

// Modal counting translation. Directed: colors are the n_atomic atomic
// concepts. Undirected: additionally one depth marker color per quantifier
// level, appended after the atomic concepts.
FormulaPtr alc_to_mp2(const AlcPtr& c, int n_atomic, bool undirected);

struct Equation {
  enum class Kind { One, Sum, Product };
  Kind kind = Kind::One;
  int t1 = 0, t2 = 0, t3 = 0;  // 0-based variable indices; pairwise distinct
};

struct EquationSystem {
  int n_vars = 0;
  std::vector<Equation> equations;

  void validate() const;
  bool solves(const std::vector<Integer>& a) const;
};

// Exhaustive search for a solution with all values <= max_value; used as a
// ground-truth fixture, not as a decision procedure.
std::optional<std::vector<Integer>> eqsys_solve_bounded(const EquationSystem& eps,
                                                        const Integer& max_value,
                                                        bool nontrivial = false);

enum class EqsysTarget { OgRelu, BlRelu, BlReluUndirected, Mp2, Mp2Undirected };

// ReLU GNN whose satisfiability matches solvability of the system (for the
// undirected target: existence of a solution that is not all zeros).
GnnSpec eqsys_to_gnn(const EquationSystem& eps, EqsysTarget target);

// Formula with global counting whose finite satisfiability (equivalently,
// satisfaction at every vertex of some graph) matches solvability.
FormulaPtr eqsys_to_mp2(const EquationSystem& eps);

// The witness graph and distinguished vertex for a solution of the system.
std::pair<Graph, int> eqsys_witness_graph(const EquationSystem& eps,
                                          const std::vector<Integer>& solution,
                                          EqsysTarget target);

struct TcInstruction {
  enum class Kind { Inc, IfZero, Halt };
  Kind kind = Kind::Halt;
  int counter = 0;  // 0 or 1
  int target = 0;   // IfZero jump state, 1-based
};

struct TcMachine {
  std::vector<TcInstruction> instructions;

  void validate() const;
};

struct TcConfiguration {
  int state = 1;  // 1-based instruction index
  Integer c0, c1;

  bool operator==(const TcConfiguration&) const = default;
};

struct TcRun {
  bool halted = false;
  std::vector<TcConfiguration> configs;  // starts at (1, 0, 0)
};

TcRun tcm_run(const TcMachine& m, long max_steps);

// Colors: S, T, C0, C1, then one color per instruction; the undirected
// variant appends three index-modulo-3 marker colors. The machine halts iff
// "every vertex satisfies the formula" is finitely satisfiable.
FormulaPtr tcm_to_m2p2(const TcMachine& m, bool undirected);
int tcm_color_count(const TcMachine& m, bool undirected);

// The chain encoding of a halting computation; every vertex of the result
// satisfies the formula. Throws if the run did not halt.
Graph tcm_witness_graph(const TcMachine& m, const TcRun& run, bool undirected);

// Two colors: the two pole leaf sets. Vertex 0 is the source.
Graph bipolar_graph(int n1, int n2, bool undirected);

// Two-hop path-count equality between the poles; holds at the source of the
// (n1, n2)-bipolar graph iff n1 = n2.
FormulaPtr bipolar_separation_formula();

// Threshold beyond which a local eventually-constant GNN cannot distinguish
// growing bipolar graphs; computed from the spectrum overapproximation.
Integer bipolar_threshold(const GnnSpec& gnn, long size_cap = 1'000'000);

}  // namespace gnnv
