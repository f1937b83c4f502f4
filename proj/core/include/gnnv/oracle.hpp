#pragma once

#include <functional>
#include <random>
#include <variant>

#include "gnnv/gnn.hpp"
#include "gnnv/graph.hpp"
#include "gnnv/logic.hpp"
#include "gnnv/rational.hpp"

namespace gnnv {

struct EnumConfig {
  int n_colors = 1;
  int max_vertices = 3;
  bool undirected = false;
};

// Calls fn on every graph with 1..max_vertices vertices, every edge subset
// (symmetric slots only when undirected) and every color assignment, in a
// fixed lexicographic order. Stops early when fn returns false.
void enumerate_graphs(const EnumConfig& cfg, const std::function<bool(const Graph&)>& fn);

// Number of graphs the enumeration visits.
Integer enumeration_count(const EnumConfig& cfg);

using SpecOrFormula = std::variant<GnnSpec, FormulaPtr>;

bool spec_accepts(const SpecOrFormula& spec, const Graph& g, int v);

// Compiles a spec once for repeated acceptance queries over many graphs.
// Networks get a sparse forward plan plus, when every constant fits, a
// fixed-point integer evaluation path; formulas get a flattened integer
// evaluator. Falls back to exact rational evaluation when a constant is too
// large or an intermediate value overflows.
class Acceptor {
 public:
  explicit Acceptor(const SpecOrFormula& spec);
  ~Acceptor();
  Acceptor(Acceptor&&) noexcept;
  Acceptor& operator=(Acceptor&&) noexcept;

  // Acceptance flag per vertex of g.
  std::vector<char> operator()(const Graph& g) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BruteResult {
  bool found = false;
  Graph graph;
  int vertex = -1;  // unused by the universal variant
  int max_vertices = 0;
};

// First accepted (graph, vertex) in enumeration order.
BruteResult brute_sat(const SpecOrFormula& spec, const EnumConfig& cfg);

// First graph whose every vertex is accepted.
BruteResult brute_universal_sat(const SpecOrFormula& spec, const EnumConfig& cfg);

struct EquivResult {
  bool equivalent = true;
  Graph graph;
  int vertex = -1;
};

// Exhaustive acceptance comparison; first disagreement returned.
EquivResult equivalence_check(const SpecOrFormula& a, const SpecOrFormula& b,
                              const EnumConfig& cfg);

struct RandomGnnOptions {
  int max_layers = 3;
  int max_dim = 3;
  int max_denominator = 4;
  int n_colors = 1;
  bool local = true;
  bool outgoing_only = false;
  bool trrelu_only = false;  // otherwise random eventually constant activations
};

struct RandomFormulaOptions {
  int max_depth = 3;
  int n_colors = 1;
  bool local = true;
  bool outgoing_only = false;
};

// Seeded generators for differential testing; a fixed seed reproduces the
// same sequence on every platform.
struct RandomSuite {
  explicit RandomSuite(unsigned long seed) : rng(seed) {}

  Graph graph(int max_vertices, int n_colors, bool undirected = false);
  GnnSpec gnn(const RandomGnnOptions& opt);
  FormulaPtr formula(const RandomFormulaOptions& opt);

  std::mt19937_64 rng;
};

}  // namespace gnnv
