#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gnnv/activation.hpp"
#include "gnnv/gnn.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

struct EpaFormula;
using EpaPtr = std::shared_ptr<const EpaFormula>;

// Integer linear combination of named variables.
using LinComb = std::map<std::string, Integer>;

struct LinRow {
  LinComb coeffs;
  Integer rhs;  // sum >= rhs
};

// Existential Presburger arithmetic with Kleene stars. No negation.
// Star(sub) holds at a value tuple iff the tuple is a finite sum (possibly
// empty) of tuples each satisfying sub.
struct EpaFormula {
  enum class Op { LinGe, And, Or, Exists, Star };
  Op op = Op::LinGe;

  std::vector<LinRow> rows;        // LinGe (empty = true)
  EpaPtr left, right;              // And/Or
  std::vector<std::string> bound;  // Exists
  EpaPtr sub;                      // Exists/Star
};

EpaPtr e_true();
EpaPtr e_linge(std::vector<LinRow> rows);
EpaPtr e_ge(LinComb coeffs, Integer rhs);
EpaPtr e_eq(LinComb coeffs, Integer rhs);  // two opposite inequalities
EpaPtr e_and(EpaPtr a, EpaPtr b);
EpaPtr e_and(std::vector<EpaPtr> parts);
EpaPtr e_or(EpaPtr a, EpaPtr b);
EpaPtr e_or(std::vector<EpaPtr> parts);
EpaPtr e_exists(std::vector<std::string> vars, EpaPtr sub);
EpaPtr e_star(EpaPtr sub);

int star_height(const EpaPtr& phi);
std::set<std::string> free_vars(const EpaPtr& phi);

using EpaAssignment = std::map<std::string, Integer>;

// Explicit certificate for a satisfying assignment: choices for Or branches,
// existential values, and star summands.
struct EpaWitness;
using EpaWitnessPtr = std::shared_ptr<const EpaWitness>;
struct EpaWitness {
  int or_branch = 0;                    // Or: 0 = left, 1 = right
  EpaAssignment exists_values;          // Exists
  EpaWitnessPtr left, right, sub;       // And (left/right), Or/Exists/Star (sub)
  std::vector<std::pair<EpaAssignment, EpaWitnessPtr>> summands;  // Star
};

// Checks a witness by direct arithmetic. Unassigned variables read as 0.
bool verify_epa_witness(const EpaPtr& phi, const EpaAssignment& sigma,
                        const EpaWitnessPtr& w);

struct EpaBounds {
  int max_summands = 3;       // per star node
  long max_magnitude = 3;     // absolute bound on searched variable values
  long budget = 2'000'000;    // search node budget; exhausting it gives Unknown
};

struct EpaSatResult {
  bool sat = false;  // false means unknown at these bounds, never refutation
  EpaAssignment assignment;
  EpaWitnessPtr witness;
};

// Searches for a witness for phi given values of its free variables.
std::optional<EpaWitnessPtr> check_epa(const EpaPtr& phi, const EpaAssignment& sigma,
                                       const EpaBounds& bounds);

// Iterative-deepening satisfiability search. Sat answers carry a verified
// witness; a negative answer only reports the exhausted bounds.
EpaSatResult sat_epa_bounded(const EpaPtr& phi, const EpaBounds& bounds);

// Normal form: Exists* over star-free, or Exists* over (star-free & Star(nf)).
bool epa_in_normal_form(const EpaPtr& phi);
EpaPtr to_normal_form(const EpaPtr& phi);

// Relation y/D = f(x/D) over the integers, for piecewise linear f.
EpaPtr characteristic_formula(const Activation& f, const Integer& d,
                              const std::string& x, const std::string& y);

// The formula defining the L-history-space of an outgoing-only local GNN
// with common denominator D: a scaled history (D*h^0 .. D*h^L) satisfies phi
// iff the history is realizable. Star height equals the layer count.
struct HistorySpaceFormula {
  EpaPtr phi;
  Integer d;                                     // the common denominator
  std::vector<std::vector<std::string>> x_vars;  // block t holds D*feature(t)
  std::vector<std::vector<std::string>> y_vars;  // out-neighbor history sums
  std::vector<std::vector<std::string>> z_vars;  // scaled pre-activations
  std::shared_ptr<const HistorySpaceFormula> child;  // structure inside the star
};

HistorySpaceFormula history_space_formula(const GnnSpec& gnn);

// Assignment + witness for the history of a concrete vertex, assembled from
// the actual out-neighbor histories (the constructive soundness direction).
std::pair<EpaAssignment, EpaWitnessPtr> history_space_witness(
    const HistorySpaceFormula& hsf, const GnnSpec& gnn, const Graph& g, int v);

struct OlTreeWitness {
  Graph tree;
  int root = 0;
};

struct OlSatResult {
  bool sat = false;  // false = unknown at these bounds
  std::optional<OlTreeWitness> witness;
};

// Bounded satisfiability for outgoing-only local piecewise-linear GNNs via
// the history-space formula; Sat reconstructs a tree witness and re-verifies
// it with forward().
OlSatResult decide_sat_ol(const GnnSpec& gnn, const EpaBounds& bounds);

// Hardness generator: an outgoing-only local ReLU GNN that is satisfiable
// whenever the quantifier-free normal-form formula is satisfiable over N.
// `vars` fixes the variable order x_1..x_n.
GnnSpec epa_to_ol_relu_gnn(const EpaPtr& phi, const std::vector<std::string>& vars);

// The layered tree model for a satisfying assignment of the normal-form
// formula (summand decompositions taken from the witness).
Graph epa_hardness_witness_graph(const EpaPtr& phi, const std::vector<std::string>& vars,
                                 const EpaAssignment& sigma, const EpaWitnessPtr& w);

}  // namespace gnnv
