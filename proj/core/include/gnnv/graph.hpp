#pragma once

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace gnnv {

// Finite colored directed graph. Vertices are dense ids 0..n-1. Color sets
// may overlap and may be empty; self-loops are allowed. When `undirected`
// is set the edge set must be symmetric.
struct Graph {
  int n_colors = 0;
  int n = 1;  // vertex count, always >= 1
  std::set<std::pair<int, int>> edges;
  std::vector<std::set<int>> colors;  // one set of vertices per color
  bool undirected = false;

  Graph() = default;
  Graph(int n_colors_, int n_) : n_colors(n_colors_), n(n_), colors(n_colors_) {}

  bool has_edge(int u, int v) const { return edges.count({u, v}) > 0; }
  bool has_color(int c, int v) const { return colors[c].count(v) > 0; }

  void add_edge(int u, int v) {
    edges.insert({u, v});
    if (undirected) edges.insert({v, u});
  }

  std::vector<int> out_neighbors(int v) const;
  std::vector<int> in_neighbors(int v) const;

  // Throws std::invalid_argument if any invariant fails (vertex range,
  // color range, symmetry when flagged).
  void validate() const;
};

// Edge set replaced by its symmetric closure; undirected flag set.
Graph symmetric_closure(const Graph& g);

// Disjoint union; vertices of b are shifted by a.n. Color counts must match.
Graph disjoint_union(const Graph& a, const Graph& b);

// Applies a vertex permutation: vertex v of g becomes perm[v] in the result.
Graph relabel(const Graph& g, const std::vector<int>& perm);

}  // namespace gnnv
