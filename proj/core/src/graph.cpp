#include "gnnv/graph.hpp"

#include <stdexcept>

namespace gnnv {

std::vector<int> Graph::out_neighbors(int v) const {
  std::vector<int> r;
  for (auto it = edges.lower_bound({v, 0}); it != edges.end() && it->first == v; ++it) {
    r.push_back(it->second);
  }
  return r;
}

std::vector<int> Graph::in_neighbors(int v) const {
  std::vector<int> r;
  for (const auto& [u, w] : edges) {
    if (w == v) r.push_back(u);
  }
  return r;
}

void Graph::validate() const {
  if (n < 1) throw std::invalid_argument("graph must have at least one vertex");
  if ((int)colors.size() != n_colors) {
    throw std::invalid_argument("color set count does not match n_colors");
  }
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (undirected && !has_edge(v, u)) {
      throw std::invalid_argument("undirected graph has a non-symmetric edge");
    }
  }
  for (const auto& cs : colors) {
    for (int v : cs) {
      if (v < 0 || v >= n) throw std::invalid_argument("colored vertex out of range");
    }
  }
}

Graph symmetric_closure(const Graph& g) {
  Graph r = g;
  for (const auto& [u, v] : g.edges) r.edges.insert({v, u});
  r.undirected = true;
  return r;
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  if (a.n_colors != b.n_colors) {
    throw std::invalid_argument("disjoint_union: color count mismatch");
  }
  Graph r(a.n_colors, a.n + b.n);
  r.undirected = a.undirected && b.undirected;
  r.edges = a.edges;
  for (const auto& [u, v] : b.edges) r.edges.insert({u + a.n, v + a.n});
  for (int c = 0; c < a.n_colors; ++c) {
    r.colors[c] = a.colors[c];
    for (int v : b.colors[c]) r.colors[c].insert(v + a.n);
  }
  return r;
}

Graph relabel(const Graph& g, const std::vector<int>& perm) {
  if ((int)perm.size() != g.n) throw std::invalid_argument("relabel: bad permutation size");
  Graph r(g.n_colors, g.n);
  r.undirected = g.undirected;
  for (const auto& [u, v] : g.edges) r.edges.insert({perm[u], perm[v]});
  for (int c = 0; c < g.n_colors; ++c) {
    for (int v : g.colors[c]) r.colors[c].insert(perm[v]);
  }
  return r;
}

}  // namespace gnnv
