#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mfperc/graph.hpp"
#include "mfperc/rng.hpp"

namespace mfperc {

/// Open/closed state of every undirected edge, indexed by EdgeId.
struct EdgeMask {
  std::vector<std::uint8_t> open;
  std::uint64_t seed = 0;
  std::size_t open_count = 0;

  static EdgeMask all_open(const Graph& g);
};

/// Each edge open independently with probability p, drawn from
/// make_rng(seed) by geometric skipping.
EdgeMask sample_percolation(const Graph& g, double p, std::uint64_t seed);

/// Open edges of K_n percolated at p, without building K_n. Skips through
/// the n(n-1)/2 pairs in row-major order (u < v).
std::vector<Edge> sample_complete_percolation(std::size_t n, double p, Rng& rng);

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t component_size(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct ComponentStats {
  std::vector<std::size_t> sizes;  // descending
  std::size_t c1_size = 0;
  std::vector<Vertex> c1_vertices;  // sorted
  std::optional<std::size_t> diameter;
  bool diameter_exact = true;
  std::optional<std::size_t> mixing_time;
};

ComponentStats component_stats(const Graph& g, const EdgeMask& mask);

/// Components of the graph on n vertices with the given edges.
ComponentStats component_stats(std::size_t n, std::span<const Edge> edges);

/// Graph on the same vertex set keeping only open edges.
Graph percolated_subgraph(const Graph& g, const EdgeMask& mask);

/// Lazily revealed edge coins. Each edge's state is drawn on first request
/// and remembered, so repeated explorations see a single configuration.
class CoinLedger {
 public:
  CoinLedger(std::size_t num_edges, double p);

  double p() const noexcept { return p_; }
  bool coin(EdgeId e, Rng& rng);
  std::optional<bool> peek(EdgeId e) const;
  /// Forget every revealed coin; cost proportional to the number revealed.
  void reset();
  std::span<const EdgeId> revealed() const noexcept { return touched_; }

 private:
  double p_;
  std::vector<std::int8_t> state_;  // -1 unknown
  std::vector<EdgeId> touched_;
};

struct BallResult {
  std::vector<std::size_t> shells;  // shells[k] = |dB^A_p(v, k)|
  std::vector<Vertex> vertices;     // B^A_p(v, r) in discovery order
  std::size_t size() const noexcept { return vertices.size(); }
};

/// Breadth-first exploration of G_p minus A from v up to distance r, with
/// coins taken from the ledger. `forbidden` holds one flag per vertex.
BallResult ball(const Graph& g, Vertex v, std::size_t r, std::span<const std::uint8_t> forbidden,
                CoinLedger& ledger, Rng& rng);

/// Convenience form with A given as a vertex list.
BallResult ball(const Graph& g, Vertex v, std::size_t r, const std::vector<Vertex>& forbidden,
                CoinLedger& ledger, Rng& rng);

enum class HaltReason { success, exhaustion, horizon };

const char* to_string(HaltReason reason) noexcept;

struct MultiRootStep {
  std::size_t t = 0;
  Vertex root = 0;
  std::size_t ball_size = 0;
  bool success = false;  // ball_size > M
  std::size_t explored = 0;  // |V_t|
};

struct MultiRootOutcome {
  std::vector<MultiRootStep> steps;
  std::optional<std::size_t> first_success;
  HaltReason halted_reason = HaltReason::horizon;
  std::size_t explored() const noexcept { return steps.empty() ? 0 : steps.back().explored; }
};

/// Roots are uniform over all of V; a root already in V_{t-1} contributes an
/// empty ball. One coin ledger serves the whole run. With stop_at_success
/// false the run continues past the first success up to t_max or exhaustion.
MultiRootOutcome multi_root_process(const Graph& g, double p, std::size_t r, std::size_t M,
                                    std::size_t t_max, Rng& rng, bool stop_at_success = true);

struct DiameterResult {
  std::size_t value = 0;
  bool exact = true;
};

constexpr std::size_t kExactDiameterLimit = 20000;

/// Largest eccentricity within `component` of the graph `open_graph`.
/// Components above `exact_limit` get a multi-sweep lower bound instead.
DiameterResult diameter(const Graph& open_graph, std::span<const Vertex> component,
                        std::size_t exact_limit = kExactDiameterLimit);

DiameterResult diameter(const Graph& g, const EdgeMask& mask, std::span<const Vertex> component,
                        std::size_t exact_limit = kExactDiameterLimit);

constexpr std::size_t kMixingSizeCap = 5000;

/// Least t such that the 1/2-lazy simple random walk on the component is
/// within `threshold` of stationarity in total variation from every start.
/// Throws ErrorKind::capacity above `size_cap` vertices.
std::size_t mixing_time_tv(const Graph& open_graph, std::span<const Vertex> component, double threshold = 0.25,
                           std::size_t size_cap = kMixingSizeCap);

std::size_t mixing_time_tv(const Graph& g, const EdgeMask& mask, std::span<const Vertex> component,
                           double threshold = 0.25, std::size_t size_cap = kMixingSizeCap);

/// Worst-start total variation after t lazy steps, by direct evolution.
/// Quadratic memory; intended for small components and as a test oracle.
double lazy_walk_tv(const Graph& open_graph, std::span<const Vertex> component, std::size_t t);

}  // namespace mfperc
