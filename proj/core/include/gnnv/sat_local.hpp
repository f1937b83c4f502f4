#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gnnv/errors.hpp"
#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/linear.hpp"
#include "gnnv/logic.hpp"
#include "gnnv/spectrum.hpp"

namespace gnnv {

// Tree of all proper (non-backtracking) paths from v of length <= depth;
// the root is vertex 0 and labels are copied from path destinations.
std::pair<Graph, int> unravel(const Graph& g, int v, int depth);

// Local GNNs cannot tell a vertex from the root of its unravelling.
bool unravelling_preserves_history(const GnnSpec& gnn, const Graph& g, int v);

// How a tree node is attached to its parent: edge_to_parent means the edge
// points from the node to the parent (the parent is an out-neighbor).
struct ParentLink {
  bool edge_to_parent = false;
  History parent;
};

// One row: constant + sum(coeffs . z)  rel  rhs, all integers.
struct CharConstraint {
  std::vector<Integer> coeffs;
  Integer constant;
  LinRel rel = LinRel::Eq;
  Integer rhs;
};

// Linear system over child multiplicities (out candidates first, then in)
// whose solvability over N characterizes consistency of a node's history.
struct CharSystem {
  int n_out = 0;
  int n_in = 0;
  std::vector<CharConstraint> rows;

  int n_vars() const { return n_out + n_in; }
};

CharSystem char_system(const GnnSpec& gnn, const History& node_history, int depth,
                       const std::optional<ParentLink>& parent,
                       const std::vector<History>& out_candidates,
                       const std::vector<History>& in_candidates);

// Exact feasibility over N; returns the lexicographically least assignment.
std::optional<std::vector<Integer>> ilp_feasible(const CharSystem& sys,
                                                 long node_budget = 200'000);

// Degree bounds of the small-model theorem, instantiated from the classical
// small-solution bound for integer programs.
struct SmallSolutionBounds {
  Integer alpha;
  Integer beta;
};

SmallSolutionBounds small_solution_bounds(const GnnSpec& gnn);

struct TreeWitness {
  Graph tree;
  int root = 0;
  // Optional: per-vertex target history (depth L - tree depth of the vertex).
  std::vector<History> histories;
};

// accepts(gnn, tree, root), plus history agreement when histories are given.
bool verify_witness(const GnnSpec& gnn, const TreeWitness& w);

struct SatCaps {
  long history_cap = 100'000;     // histories per depth
  long spectrum_cap = 1'000'000;  // vectors per spectrum layer
  long ilp_node_budget = 200'000;
  long witness_vertex_cap = 100'000;
  // Subformula limit of the logic route; the translated network is dense and
  // cubic in this number, so it stays small.
  long translation_node_cap = 100;
  bool memoize = true;
};

struct SatStats {
  long histories = 0;
  long check_calls = 0;
  long ilp_calls = 0;
};

struct Verdict {
  enum class Kind { Sat, Unsat, ResourceLimit };
  Kind kind = Kind::Unsat;
  std::optional<TreeWitness> witness;
  std::string reason;
  SatStats stats;
};

// Deterministic decision procedure for local truncated-ReLU GNNs: exhaustive
// memoized search over the over-approximated history space.
Verdict decide_sat(const GnnSpec& gnn, const SatCaps& caps = {});

// Local eventually-constant GNNs, routed through the logic translations; the
// witness is re-verified against the original GNN.
Verdict decide_sat_eventually_constant(const GnnSpec& gnn, const SatCaps& caps = {});

// Repeatedly replaces the deepest vertex violating the degree bounds by a
// small solution of its characteristic system, duplicating child subtrees.
TreeWitness minimize_witness(const GnnSpec& gnn, const TreeWitness& w,
                             long node_budget = 200'000);

struct UniversalResult {
  bool found = false;
  Graph graph;
  int max_vertices = 0;
};

// Bounded search for a graph on which every vertex is accepted.
UniversalResult decide_universal_bounded(const std::variant<GnnSpec, FormulaPtr>& spec,
                                         int max_vertices, bool undirected);

}  // namespace gnnv
