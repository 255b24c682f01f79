#include "mfperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>

#include "mfperc/error.hpp"

namespace mfperc {

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_parameter, "p must lie in [0, 1]");
}

// Advance a position by one plus a geometric skip, saturating at `limit`.
std::uint64_t next_open(std::uint64_t pos, Rng& rng, double p, std::uint64_t limit) {
  const std::uint64_t skip = geometric_skip(rng, p);
  if (skip >= limit - pos) return limit;
  return pos + skip;
}

}  // namespace

EdgeMask EdgeMask::all_open(const Graph& g) {
  EdgeMask mask;
  mask.open.assign(g.num_edges(), 1);
  mask.open_count = g.num_edges();
  return mask;
}

EdgeMask sample_percolation(const Graph& g, double p, std::uint64_t seed) {
  check_p(p);
  EdgeMask mask;
  mask.seed = seed;
  const std::uint64_t m = g.num_edges();
  mask.open.assign(m, 0);
  Rng rng = make_rng(seed);
  for (std::uint64_t pos = next_open(0, rng, p, m); pos < m; pos = next_open(pos + 1, rng, p, m)) {
    mask.open[pos] = 1;
    ++mask.open_count;
  }
  return mask;
}

std::vector<Edge> sample_complete_percolation(std::size_t n, double p, Rng& rng) {
  check_p(p);
  if (n < 2) throw Error(ErrorKind::invalid_parameter, "complete graph needs n >= 2");
  if (n > std::numeric_limits<Vertex>::max()) throw Error(ErrorKind::capacity, "n exceeds vertex id range");
  const std::uint64_t nn = n;
  const std::uint64_t pairs = nn * (nn - 1) / 2;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(std::min<double>(static_cast<double>(pairs) * p * 1.1 + 16.0, 1e8)));
  std::uint64_t row = 0, row_start = 0;
  for (std::uint64_t pos = next_open(0, rng, p, pairs); pos < pairs; pos = next_open(pos + 1, rng, p, pairs)) {
    while (pos >= row_start + (nn - 1 - row)) {
      row_start += nn - 1 - row;
      ++row;
    }
    edges.push_back({static_cast<Vertex>(row), static_cast<Vertex>(row + 1 + (pos - row_start))});
  }
  return edges;
}

namespace {

ComponentStats stats_from(UnionFind& uf, std::size_t n) {
  ComponentStats st;
  std::size_t best_root = 0, best = 0;
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t root = uf.find(x);
    if (root == x) st.sizes.push_back(uf.component_size(x));
    if (uf.component_size(root) > best) {
      best = uf.component_size(root);
      best_root = root;
    }
  }
  std::sort(st.sizes.begin(), st.sizes.end(), std::greater<>());
  st.c1_size = best;
  st.c1_vertices.reserve(best);
  for (std::size_t x = 0; x < n; ++x)
    if (uf.find(x) == best_root) st.c1_vertices.push_back(static_cast<Vertex>(x));
  return st;
}

}  // namespace

ComponentStats component_stats(const Graph& g, const EdgeMask& mask) {
  if (mask.open.size() != g.num_edges()) throw Error(ErrorKind::invalid_parameter, "mask does not match graph");
  UnionFind uf(g.num_vertices());
  const auto& edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (mask.open[e]) uf.unite(edges[e].u, edges[e].v);
  return stats_from(uf, g.num_vertices());
}

ComponentStats component_stats(std::size_t n, std::span<const Edge> edges) {
  UnionFind uf(n);
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) throw Error(ErrorKind::invalid_parameter, "edge endpoint out of range");
    uf.unite(e.u, e.v);
  }
  return stats_from(uf, n);
}

Graph percolated_subgraph(const Graph& g, const EdgeMask& mask) {
  if (mask.open.size() != g.num_edges()) throw Error(ErrorKind::invalid_parameter, "mask does not match graph");
  std::vector<Edge> kept;
  kept.reserve(mask.open_count);
  const auto& edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (mask.open[e]) kept.push_back(edges[e]);
  return Graph(g.num_vertices(), std::move(kept));
}

CoinLedger::CoinLedger(std::size_t num_edges, double p) : p_(p), state_(num_edges, -1) { check_p(p); }

bool CoinLedger::coin(EdgeId e, Rng& rng) {
  auto& s = state_[e];
  if (s < 0) {
    s = bernoulli(rng, p_) ? 1 : 0;
    touched_.push_back(e);
  }
  return s == 1;
}

std::optional<bool> CoinLedger::peek(EdgeId e) const {
  if (state_[e] < 0) return std::nullopt;
  return state_[e] == 1;
}

void CoinLedger::reset() {
  for (EdgeId e : touched_) state_[e] = -1;
  touched_.clear();
}

namespace {

// Scratch distances reused across calls on the same thread.
std::vector<std::uint32_t>& scratch_distance(std::size_t n) {
  thread_local std::vector<std::uint32_t> dist;
  if (dist.size() < n) dist.assign(n, std::numeric_limits<std::uint32_t>::max());
  return dist;
}

}  // namespace

BallResult ball(const Graph& g, Vertex v, std::size_t r, std::span<const std::uint8_t> forbidden, CoinLedger& ledger,
                Rng& rng) {
  const std::size_t n = g.num_vertices();
  if (v >= n) throw Error(ErrorKind::invalid_parameter, "vertex out of range");
  if (forbidden.size() != n) throw Error(ErrorKind::invalid_parameter, "forbidden mask has wrong size");
  if (forbidden[v]) throw Error(ErrorKind::invalid_parameter, "root lies in the forbidden set");
  constexpr auto kFar = std::numeric_limits<std::uint32_t>::max();
  auto& dist = scratch_distance(n);
  BallResult out;
  out.shells.assign(r + 1, 0);
  out.vertices.push_back(v);
  dist[v] = 0;
  for (std::size_t head = 0; head < out.vertices.size(); ++head) {
    const Vertex x = out.vertices[head];
    const std::uint32_t hx = dist[x];
    ++out.shells[hx];
    if (hx == r) continue;
    auto nb = g.neighbors(x);
    auto ids = g.incident_edges(x);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const Vertex y = nb[i];
      if (forbidden[y] || dist[y] != kFar) continue;
      if (ledger.coin(ids[i], rng)) {
        dist[y] = hx + 1;
        out.vertices.push_back(y);
      }
    }
  }
  for (Vertex x : out.vertices) dist[x] = kFar;
  return out;
}

BallResult ball(const Graph& g, Vertex v, std::size_t r, const std::vector<Vertex>& forbidden, CoinLedger& ledger,
                Rng& rng) {
  std::vector<std::uint8_t> mask(g.num_vertices(), 0);
  for (Vertex a : forbidden) {
    if (a >= g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "forbidden vertex out of range");
    mask[a] = 1;
  }
  return ball(g, v, r, std::span<const std::uint8_t>(mask), ledger, rng);
}

const char* to_string(HaltReason reason) noexcept {
  switch (reason) {
    case HaltReason::success: return "success";
    case HaltReason::exhaustion: return "exhaustion";
    case HaltReason::horizon: return "horizon";
  }
  return "unknown";
}

MultiRootOutcome multi_root_process(const Graph& g, double p, std::size_t r, std::size_t M, std::size_t t_max,
                                    Rng& rng, bool stop_at_success) {
  check_p(p);
  if (r < 1 || t_max < 1) throw Error(ErrorKind::invalid_parameter, "r and T_max must be >= 1");
  const std::size_t n = g.num_vertices();
  if (n == 0) throw Error(ErrorKind::invalid_parameter, "empty graph");
  CoinLedger ledger(g.num_edges(), p);
  std::vector<std::uint8_t> seen(n, 0);
  std::size_t explored = 0;
  MultiRootOutcome out;
  for (std::size_t t = 1; t <= t_max; ++t) {
    MultiRootStep step;
    step.t = t;
    step.root = static_cast<Vertex>(uniform_below(rng, n));
    if (!seen[step.root]) {
      const auto b = ball(g, step.root, r, std::span<const std::uint8_t>(seen), ledger, rng);
      step.ball_size = b.size();
      for (Vertex x : b.vertices) seen[x] = 1;
      explored += b.size();
    }
    step.success = step.ball_size > M;
    step.explored = explored;
    out.steps.push_back(step);
    if (step.success && !out.first_success) {
      out.first_success = t;
      if (stop_at_success) {
        out.halted_reason = HaltReason::success;
        return out;
      }
    }
    if (explored == n) {
      out.halted_reason = HaltReason::exhaustion;
      return out;
    }
  }
  out.halted_reason = HaltReason::horizon;
  return out;
}

namespace {

// Eccentricity of s within its component; returns (eccentricity, a farthest vertex).
std::pair<std::size_t, Vertex> bfs_far(const Graph& h, Vertex s, std::vector<std::uint32_t>& dist,
                                       std::vector<Vertex>& order) {
  constexpr auto kFar = std::numeric_limits<std::uint32_t>::max();
  order.clear();
  order.push_back(s);
  dist[s] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Vertex x = order[head];
    for (Vertex y : h.neighbors(x)) {
      if (dist[y] != kFar) continue;
      dist[y] = dist[x] + 1;
      order.push_back(y);
    }
  }
  const Vertex last = order.back();
  const std::size_t ecc = dist[last];
  for (Vertex x : order) dist[x] = kFar;
  return {ecc, last};
}

}  // namespace

DiameterResult diameter(const Graph& open_graph, std::span<const Vertex> component, std::size_t exact_limit) {
  if (component.empty()) throw Error(ErrorKind::invalid_parameter, "empty component");
  std::vector<std::uint32_t> dist(open_graph.num_vertices(), std::numeric_limits<std::uint32_t>::max());
  std::vector<Vertex> order;
  DiameterResult res;
  if (component.size() <= exact_limit) {
    for (Vertex s : component) res.value = std::max(res.value, bfs_far(open_graph, s, dist, order).first);
    return res;
  }
  res.exact = false;
  Vertex s = component.front();
  for (int sweep = 0; sweep < 4; ++sweep) {
    const auto [ecc, far] = bfs_far(open_graph, s, dist, order);
    res.value = std::max(res.value, ecc);
    s = far;
  }
  return res;
}

DiameterResult diameter(const Graph& g, const EdgeMask& mask, std::span<const Vertex> component,
                        std::size_t exact_limit) {
  return diameter(percolated_subgraph(g, mask), component, exact_limit);
}

namespace {

struct LocalComponent {
  std::vector<std::vector<std::size_t>> adj;
  std::vector<double> degree;
};

LocalComponent localize(const Graph& h, std::span<const Vertex> component) {
  std::unordered_map<Vertex, std::size_t> local;
  local.reserve(component.size() * 2);
  for (std::size_t i = 0; i < component.size(); ++i) local.emplace(component[i], i);
  LocalComponent lc;
  lc.adj.resize(component.size());
  lc.degree.resize(component.size());
  for (std::size_t i = 0; i < component.size(); ++i) {
    for (Vertex y : h.neighbors(component[i])) {
      auto it = local.find(y);
      if (it == local.end()) throw Error(ErrorKind::invalid_parameter, "component is not closed under adjacency");
      lc.adj[i].push_back(it->second);
    }
    lc.degree[i] = static_cast<double>(lc.adj[i].size());
    if (component.size() > 1 && lc.adj[i].empty())
      throw Error(ErrorKind::invalid_parameter, "component is not connected");
  }
  return lc;
}

double worst_tv(const Eigen::MatrixXd& dist, const Eigen::VectorXd& pi) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < dist.rows(); ++x)
    worst = std::max(worst, 0.5 * (dist.row(x).transpose() - pi).cwiseAbs().sum());
  return worst;
}

}  // namespace

double lazy_walk_tv(const Graph& open_graph, std::span<const Vertex> component, std::size_t t) {
  if (component.empty()) throw Error(ErrorKind::invalid_parameter, "empty component");
  if (component.size() == 1) return 0.0;
  const auto lc = localize(open_graph, component);
  const auto k = static_cast<Eigen::Index>(component.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index x = 0; x < k; ++x) {
    P(x, x) += 0.5;
    for (std::size_t y : lc.adj[static_cast<std::size_t>(x)])
      P(x, static_cast<Eigen::Index>(y)) += 0.5 / lc.degree[static_cast<std::size_t>(x)];
  }
  Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(lc.degree.data(), k);
  pi /= pi.sum();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Identity(k, k);
  for (std::size_t s = 0; s < t; ++s) dist = (dist * P).eval();
  return worst_tv(dist, pi);
}

std::size_t mixing_time_tv(const Graph& open_graph, std::span<const Vertex> component, double threshold,
                           std::size_t size_cap) {
  if (component.empty()) throw Error(ErrorKind::invalid_parameter, "empty component");
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::invalid_parameter, "threshold must lie in (0, 1)");
  if (component.size() > size_cap)
    throw Error(ErrorKind::capacity, "component of " + std::to_string(component.size()) +
                                         " vertices exceeds the mixing cap " + std::to_string(size_cap));
  if (component.size() == 1) return 0;
  const auto lc = localize(open_graph, component);
  const auto k = static_cast<Eigen::Index>(component.size());

  // The lazy walk is reversible, so D^{1/2} P D^{-1/2} = (I + D^{-1/2} A D^{-1/2}) / 2
  // is symmetric and P^t follows from one eigendecomposition.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index x = 0; x < k; ++x)
    for (std::size_t y : lc.adj[static_cast<std::size_t>(x)])
      S(x, static_cast<Eigen::Index>(y)) =
          1.0 / std::sqrt(lc.degree[static_cast<std::size_t>(x)] * lc.degree[y]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::sampling_failure, "eigendecomposition failed");
  const Eigen::VectorXd lazy = (solver.eigenvalues().array() + 1.0) / 2.0;
  const Eigen::MatrixXd& U = solver.eigenvectors();
  Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(lc.degree.data(), k);
  pi /= pi.sum();
  const Eigen::VectorXd sqrt_pi = pi.cwiseSqrt();
  const Eigen::VectorXd inv_sqrt_pi = sqrt_pi.cwiseInverse();

  // Eigenvalues ascend; the last one is the stationary direction.
  auto tv_at = [&](std::size_t t) {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      const double w = std::pow(lazy[i], static_cast<double>(t));
      if (w > 1e-15) kept.push_back(i);
    }
    if (kept.empty()) return 0.0;
    const auto q = static_cast<Eigen::Index>(kept.size());
    Eigen::MatrixXd V(k, q), W(k, q);
    for (Eigen::Index j = 0; j < q; ++j) {
      V.col(j) = U.col(kept[static_cast<std::size_t>(j)]);
      W.col(j) = V.col(j) * std::pow(lazy[kept[static_cast<std::size_t>(j)]], static_cast<double>(t));
    }
    // P^t(x, y) - pi(y) = sqrt(pi(y) / pi(x)) sum_i lambda_i^t u_i(x) u_i(y).
    Eigen::MatrixXd deviation = W * V.transpose();
    deviation = inv_sqrt_pi.asDiagonal() * deviation * sqrt_pi.asDiagonal();
    double worst = 0.0;
    for (Eigen::Index x = 0; x < k; ++x) worst = std::max(worst, 0.5 * deviation.row(x).cwiseAbs().sum());
    return worst;
  };

  // TV to stationarity is nonincreasing in t: bracket by doubling, then bisect.
  std::size_t hi = 1;
  while (tv_at(hi) > threshold) {
    if (hi > (std::size_t{1} << 50)) throw Error(ErrorKind::capacity, "mixing time beyond search range");
    hi *= 2;
  }
  std::size_t lo = hi / 2;  // tv(lo) > threshold, or lo == 0
  if (hi == 1) return 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (tv_at(mid) > threshold)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

std::size_t mixing_time_tv(const Graph& g, const EdgeMask& mask, std::span<const Vertex> component, double threshold,
                           std::size_t size_cap) {
  return mixing_time_tv(percolated_subgraph(g, mask), component, threshold, size_cap);
}

}  // namespace mfperc
