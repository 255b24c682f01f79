#pragma once

// Brute-force reference computations shared by the unit tests. Each one is
// written directly from a definition and shares no code with the library.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "mfperc/graph.hpp"

namespace oracle {

using mfperc::Graph;
using mfperc::Vertex;

inline std::vector<std::vector<Vertex>> adjacency(const Graph& g) {
  std::vector<std::vector<Vertex>> adj(g.num_vertices());
  for (const auto& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

/// Return probabilities by enumerating every non-backtracking path from v.
inline std::vector<double> nb_returns(const Graph& g, Vertex v, std::size_t horizon) {
  const auto adj = adjacency(g);
  std::vector<double> R(horizon + 1, 0.0);
  R[0] = 1.0;
  std::function<void(Vertex, Vertex, std::size_t, double)> walk = [&](Vertex prev, Vertex cur, std::size_t s,
                                                                      double prob) {
    if (cur == v) R[s] += prob;
    if (s == horizon) return;
    const double share = prob / static_cast<double>(adj[cur].size() - 1);
    for (Vertex nxt : adj[cur])
      if (nxt != prev) walk(cur, nxt, s + 1, share);
  };
  for (Vertex first : adj[v]) walk(v, first, 1, 1.0 / static_cast<double>(adj[v].size()));
  return R;
}

/// Distribution of the vertex reached after `steps` further moves from the
/// directed edge (x, y), by path enumeration.
inline std::vector<double> nb_from_edge(const Graph& g, Vertex x, Vertex y, std::size_t steps) {
  const auto adj = adjacency(g);
  std::vector<double> dist(g.num_vertices(), 0.0);
  std::function<void(Vertex, Vertex, std::size_t, double)> walk = [&](Vertex prev, Vertex cur, std::size_t s,
                                                                      double prob) {
    if (s == steps) {
      dist[cur] += prob;
      return;
    }
    const double share = prob / static_cast<double>(adj[cur].size() - 1);
    for (Vertex nxt : adj[cur])
      if (nxt != prev) walk(cur, nxt, s + 1, share);
  };
  walk(x, y, 0, 1.0);
  return dist;
}

/// Shortest cycle by enumerating simple cycles through each vertex with DFS.
inline std::optional<std::size_t> girth_by_cycles(const Graph& g) {
  const auto adj = adjacency(g);
  const std::size_t n = g.num_vertices();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<char> on_path(n, 0);
  std::function<void(Vertex, Vertex, std::size_t)> dfs = [&](Vertex start, Vertex cur, std::size_t len) {
    if (len >= best) return;
    for (Vertex nxt : adj[cur]) {
      if (nxt == start && len >= 3) best = std::min(best, len);
      // Only visit vertices larger than start so each cycle is rooted at its minimum.
      if (nxt > start && !on_path[nxt]) {
        on_path[nxt] = 1;
        dfs(start, nxt, len + 1);
        on_path[nxt] = 0;
      }
    }
  };
  for (Vertex s = 0; s < n; ++s) {
    on_path[s] = 1;
    dfs(s, s, 1);
    on_path[s] = 0;
  }
  if (best == std::numeric_limits<std::size_t>::max()) return std::nullopt;
  return best;
}

/// Floyd-Warshall distances of the graph restricted to `open` edges.
inline std::vector<std::vector<std::size_t>> apsp(const Graph& g, const std::vector<std::uint8_t>& open) {
  const std::size_t n = g.num_vertices();
  const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (open[e]) d[g.edges()[e].u][g.edges()[e].v] = d[g.edges()[e].v][g.edges()[e].u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

/// Component id per vertex by depth-first search over open edges.
inline std::vector<std::size_t> components(const Graph& g, const std::vector<std::uint8_t>& open) {
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<Vertex>> adj(n);
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (open[e]) {
      adj[g.edges()[e].u].push_back(g.edges()[e].v);
      adj[g.edges()[e].v].push_back(g.edges()[e].u);
    }
  std::vector<std::size_t> comp(n, std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (Vertex s = 0; s < n; ++s) {
    if (comp[s] != std::numeric_limits<std::size_t>::max()) continue;
    std::vector<Vertex> stack{s};
    comp[s] = next;
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : adj[x])
        if (comp[y] == std::numeric_limits<std::size_t>::max()) {
          comp[y] = next;
          stack.push_back(y);
        }
    }
    ++next;
  }
  return comp;
}

/// Vertex lists of the open components.
inline std::vector<std::vector<Vertex>> component_lists(const Graph& g, const std::vector<std::uint8_t>& open) {
  const auto comp = components(g, open);
  std::vector<std::vector<Vertex>> out;
  for (Vertex v = 0; v < comp.size(); ++v) {
    if (comp[v] >= out.size()) out.resize(comp[v] + 1);
    out[comp[v]].push_back(v);
  }
  return out;
}

/// Exhaustive moments of the depth-r tree over all 2^edges configurations.
struct Enumerated {
  double h_sq = 0.0;
  double survival = 0.0;
  double window_sq_given_alive = 0.0;
};

inline Enumerated enumerate_tree(std::size_t d, double p, std::size_t r) {
  // Nodes in BFS order; node 0 is the root.
  std::vector<int> parent{-1};
  std::vector<std::size_t> depth{0};
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (depth[i] == r) continue;
    const std::size_t kids = i == 0 ? d : d - 1;
    for (std::size_t c = 0; c < kids; ++c) {
      parent.push_back(static_cast<int>(i));
      depth.push_back(depth[i] + 1);
    }
  }
  const std::size_t m = parent.size() - 1;
  const std::size_t half = r / 2;
  Enumerated out;
  long double h_sq = 0.0L, survival = 0.0L, window = 0.0L, alive_mass = 0.0L;
  std::vector<char> conn(parent.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    long double w = 1.0L;
    conn[0] = 1;
    std::vector<std::size_t> levels(r + 1, 0);
    levels[0] = 1;
    for (std::size_t i = 1; i <= m; ++i) {
      const bool open = (mask >> (i - 1)) & 1;
      w *= open ? static_cast<long double>(p) : 1.0L - static_cast<long double>(p);
      conn[i] = open && conn[parent[i]];
      if (conn[i]) ++levels[depth[i]];
    }
    const long double h = static_cast<long double>(levels[r]);
    h_sq += w * h * h;
    if (levels[r] > 0) survival += w;
    if (levels[half] > 0) {
      long double s = 0.0L;
      for (std::size_t k = half; k <= r; ++k) s += static_cast<long double>(levels[k]);
      window += w * s * s;
      alive_mass += w;
    }
  }
  out.h_sq = static_cast<double>(h_sq);
  out.survival = static_cast<double>(survival);
  out.window_sq_given_alive = static_cast<double>(window / alive_mass);
  return out;
}

}  // namespace oracle
