#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "mfperc/graph.hpp"
#include "mfperc/rng.hpp"

namespace mfperc {

using DirEdge = std::size_t;

/// The 2|E| directed edges of a graph, indexed in adjacency order: (x, y)
/// with y = g.neighbors(x)[i] has index g.offset(x) + i. Holds a reference to
/// the graph, which must outlive the space.
class DirectedEdgeSpace {
 public:
  /// Throws ErrorKind::invalid_structure if some vertex has degree < 2.
  explicit DirectedEdgeSpace(const Graph& g);

  const Graph& graph() const noexcept { return *graph_; }
  std::size_t size() const noexcept { return heads_.size(); }

  Vertex tail(DirEdge e) const noexcept { return tails_[e]; }
  Vertex head(DirEdge e) const noexcept { return heads_[e]; }
  DirEdge reverse(DirEdge e) const noexcept { return reverse_[e]; }

  /// Index of (x, y); throws ErrorKind::invalid_parameter if not an edge.
  DirEdge index(Vertex x, Vertex y) const;

  /// Edges (y, z) with z != x for e = (x, y).
  std::vector<DirEdge> successors(DirEdge e) const;

  /// One non-backtracking step of a mass vector over directed edges.
  Eigen::VectorXd step(const Eigen::VectorXd& mass) const;

  /// Mass aggregated by head vertex.
  Eigen::VectorXd head_marginal(const Eigen::VectorXd& mass) const;

  /// Uniform mass over the edges out of v.
  Eigen::VectorXd start_at_vertex(Vertex v) const;

  /// Unit mass on one directed edge.
  Eigen::VectorXd start_at_edge(DirEdge e) const;

 private:
  const Graph* graph_;
  std::vector<Vertex> tails_;
  std::vector<Vertex> heads_;
  std::vector<DirEdge> reverse_;
};

/// values[s] is the probability that the walk from `origin` (uniform first
/// edge) sits at `origin` after exactly s edge traversals; values[0] = 1.
struct ReturnProfile {
  Vertex origin = 0;
  std::size_t horizon = 0;
  bool averaged_over_vertices = false;
  std::vector<double> values;

  double operator[](std::size_t s) const { return values.at(s); }
};

/// Upper bound on the horizon accepted by the exact routines.
constexpr std::size_t kMaxHorizon = 100000;

/// Suggested horizon 2*ceil(n^{1/3}) + girth.
std::size_t default_horizon(const Graph& g);

ReturnProfile return_probabilities(const Graph& g, Vertex v, std::size_t horizon);

/// Vertex average of the return profile. Vertex-transitive graphs use a
/// single origin.
ReturnProfile average_return_probabilities(const Graph& g, std::size_t horizon);

/// Walk of `steps` traversals starting at v: steps + 1 vertices.
std::vector<Vertex> sample_nbrw(const Graph& g, Vertex v, std::size_t steps, Rng& rng);

struct SampledReturnProfile {
  std::size_t samples = 0;
  std::vector<double> frequency;  // index s as in ReturnProfile
  std::vector<double> standard_error;
};

SampledReturnProfile sample_return_probabilities(const Graph& g, Vertex v, std::size_t horizon,
                                                 std::size_t samples, Rng& rng);

/// Both sides of the pairing identity
///   sum_y sum_{i != j} P_(v,v_i)(X_t = y) P_(v,v_j)(X_t2 = y) = d(d-1) R[t + t2 + 2]
/// where X_t counts transitions after the first edge.
struct LoopIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return std::abs(lhs - rhs); }
};

/// Throws ErrorKind::invalid_structure for non-regular graphs.
LoopIdentity loop_identity(const Graph& g, Vertex v, std::size_t t, std::size_t t2);

inline double loop_identity_residual(const Graph& g, Vertex v, std::size_t t, std::size_t t2) {
  return loop_identity(g, v, t, t2).residual();
}

}  // namespace mfperc
