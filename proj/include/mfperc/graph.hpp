#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mfperc {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;

enum class Family { complete, hamming, lps, random_regular, custom };

const char* to_string(Family family) noexcept;

struct Edge {
  Vertex u;
  Vertex v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable simple undirected graph in compressed adjacency form.
///
/// Vertices are dense ids 0..n-1. Every undirected edge {u,v} (u < v) has an
/// id into edges(); incident_edges(v)[i] is the id of {v, neighbors(v)[i]}.
/// Neighbor lists are sorted.
class Graph {
 public:
  Graph() = default;

  /// Validates simplicity: ids in range, no loops, no duplicate edges.
  Graph(std::size_t n, std::vector<Edge> edges, Family family = Family::custom,
        bool vertex_transitive = false);

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_directed_edges() const noexcept { return 2 * edges_.size(); }

  std::span<const Vertex> neighbors(Vertex v) const noexcept {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::span<const EdgeId> incident_edges(Vertex v) const noexcept {
    return {edge_ids_.data() + offsets_[v], edge_ids_.data() + offsets_[v + 1]};
  }
  /// Position of v's adjacency block inside the flat directed-edge arrays.
  std::size_t offset(Vertex v) const noexcept { return offsets_[v]; }

  std::size_t degree(Vertex v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  /// Common degree when the graph is regular.
  std::optional<std::size_t> regular_degree() const noexcept { return regular_degree_; }
  std::size_t min_degree() const noexcept { return min_degree_; }
  std::size_t max_degree() const noexcept { return max_degree_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  Family family() const noexcept { return family_; }
  /// Set by generators whose output is vertex-transitive by construction.
  bool vertex_transitive() const noexcept { return transitive_; }

  /// Id of {u, v}, if it is an edge.
  std::optional<EdgeId> edge_id(Vertex u, Vertex v) const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adjacency_;
  std::vector<EdgeId> edge_ids_;
  std::optional<std::size_t> regular_degree_;
  std::size_t min_degree_ = 0;
  std::size_t max_degree_ = 0;
  Family family_ = Family::custom;
  bool transitive_ = false;
};

// Generators ---------------------------------------------------------------

Graph complete_graph(std::size_t n);

/// H(k, m): vertices {0..m-1}^k encoded in base m (coordinate 0 least
/// significant), adjacent when they differ in exactly one coordinate.
Graph hamming_graph(std::size_t k, std::size_t m);

Graph cycle_graph(std::size_t n);

Graph petersen_graph();

/// Configuration model with whole-graph rejection until the pairing is
/// simple. Attempt i uses the stream derive_seed(seed, {i}).
Graph random_regular_graph(std::size_t n, std::size_t d, std::uint64_t seed,
                           std::size_t max_attempts = 10000);

/// Lubotzky-Phillips-Sarnak Cayley graph X^{p,q}: (p+1)-regular, on PSL(2,q)
/// when p is a square mod q and on PGL(2,q) (bipartite) otherwise.
Graph lps_ramanujan_graph(std::uint64_t p, std::uint64_t q);

bool is_prime(std::uint64_t x) noexcept;

// Edge-list text format: "n m" then m lines "u v" with u < v. ---------------

Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list_file(const std::string& path, const Graph& g);

// Diagnostics --------------------------------------------------------------

/// Shortest cycle length; nullopt for forests.
std::optional<std::size_t> girth(const Graph& g);

bool is_connected(const Graph& g);

/// Two-colouring if one exists.
std::optional<std::vector<std::uint8_t>> bipartition(const Graph& g);

inline bool is_bipartite(const Graph& g) { return bipartition(g).has_value(); }

/// Largest |eigenvalue| of the simple-random-walk transition matrix after
/// removing the trivial eigenvalue 1 (and -1 when bipartite). Power
/// iteration on D^{-1/2} A D^{-1/2} with both trivial eigenvectors deflated.
/// Throws ErrorKind::disconnected for disconnected input. Returns 0 when
/// nothing is left after deflation (e.g. K_2).
double spectral_expansion(const Graph& g, double tol = 1e-9,
                          std::size_t max_iterations = 200000);

struct GraphDiagnostics {
  std::optional<std::size_t> girth;
  bool is_regular = false;
  std::size_t degree = 0;
  std::optional<double> lambda_star;
  bool is_bipartite = false;
};

GraphDiagnostics diagnose(const Graph& g, bool with_spectrum = true, double tol = 1e-9);

}  // namespace mfperc
