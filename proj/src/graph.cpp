#include "mfperc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "mfperc/error.hpp"
#include "mfperc/rng.hpp"

namespace mfperc {

const char* to_string(Family family) noexcept {
  switch (family) {
    case Family::complete: return "complete";
    case Family::hamming: return "hamming";
    case Family::lps: return "lps";
    case Family::random_regular: return "random_regular";
    case Family::custom: return "custom";
  }
  return "custom";
}

Graph::Graph(std::size_t n, std::vector<Edge> edges, Family family, bool vertex_transitive)
    : n_(n), edges_(std::move(edges)), family_(family), transitive_(vertex_transitive) {
  if (n > std::numeric_limits<Vertex>::max())
    throw Error(ErrorKind::capacity, "vertex count exceeds 32-bit ids");
  if (edges_.size() > std::numeric_limits<EdgeId>::max())
    throw Error(ErrorKind::capacity, "edge count exceeds 32-bit ids");
  for (auto& e : edges_) {
    if (e.u >= n || e.v >= n)
      throw Error(ErrorKind::invalid_structure,
                  "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") out of range");
    if (e.u == e.v) throw Error(ErrorKind::invalid_structure, "self-loop at " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end())
    throw Error(ErrorKind::invalid_structure,
                "parallel edge (" + std::to_string(dup->u) + "," + std::to_string(dup->v) + ")");

  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  adjacency_.resize(offsets_[n]);
  edge_ids_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    const auto& e = edges_[id];
    adjacency_[fill[e.u]] = e.v;
    edge_ids_[fill[e.u]++] = id;
    adjacency_[fill[e.v]] = e.u;
    edge_ids_[fill[e.v]++] = id;
  }
  std::vector<std::pair<Vertex, EdgeId>> block;
  for (std::size_t v = 0; v < n; ++v) {
    block.clear();
    for (std::size_t i = offsets_[v]; i < offsets_[v + 1]; ++i) block.emplace_back(adjacency_[i], edge_ids_[i]);
    std::sort(block.begin(), block.end());
    for (std::size_t i = 0; i < block.size(); ++i) {
      adjacency_[offsets_[v] + i] = block[i].first;
      edge_ids_[offsets_[v] + i] = block[i].second;
    }
  }
  if (n > 0) {
    auto [lo, hi] = std::minmax_element(deg.begin(), deg.end());
    min_degree_ = *lo;
    max_degree_ = *hi;
    if (min_degree_ == max_degree_) regular_degree_ = min_degree_;
  }
}

std::optional<EdgeId> Graph::edge_id(Vertex u, Vertex v) const noexcept {
  if (u >= n_ || v >= n_) return std::nullopt;
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return std::nullopt;
  return incident_edges(u)[static_cast<std::size_t>(it - nb.begin())];
}

// Generators ---------------------------------------------------------------

Graph complete_graph(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::invalid_parameter, "complete graph needs n >= 2");
  if (n > 200000) throw Error(ErrorKind::capacity, "complete graph too large to materialize");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) edges.push_back({u, v});
  return Graph(n, std::move(edges), Family::complete, true);
}

Graph hamming_graph(std::size_t k, std::size_t m) {
  if (k < 1 || m < 2) throw Error(ErrorKind::invalid_parameter, "hamming graph needs k >= 1, m >= 2");
  std::size_t n = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (n > std::numeric_limits<Vertex>::max() / m)
      throw Error(ErrorKind::capacity, "m^k exceeds addressable vertex count");
    n *= m;
  }
  const double edge_count = 0.5 * static_cast<double>(n) * static_cast<double>(k * (m - 1));
  if (edge_count > 5e8) throw Error(ErrorKind::capacity, "hamming graph has too many edges");

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(edge_count));
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t place = 1;
    for (std::size_t c = 0; c < k; ++c, place *= m) {
      const std::size_t digit = (x / place) % m;
      // Only emit edges to a larger digit in this coordinate.
      for (std::size_t other = digit + 1; other < m; ++other)
        edges.push_back({static_cast<Vertex>(x), static_cast<Vertex>(x + (other - digit) * place)});
    }
  }
  return Graph(n, std::move(edges), Family::hamming, true);
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw Error(ErrorKind::invalid_parameter, "cycle needs n >= 3");
  std::vector<Edge> edges;
  for (Vertex i = 0; i < n; ++i) edges.push_back({i, static_cast<Vertex>((i + 1) % n)});
  return Graph(n, std::move(edges), Family::custom, true);
}

Graph petersen_graph() {
  std::vector<Edge> edges;
  for (Vertex i = 0; i < 5; ++i) {
    edges.push_back({i, static_cast<Vertex>((i + 1) % 5)});
    edges.push_back({static_cast<Vertex>(i + 5), static_cast<Vertex>((i + 2) % 5 + 5)});
    edges.push_back({i, static_cast<Vertex>(i + 5)});
  }
  return Graph(10, std::move(edges), Family::custom, true);
}

Graph random_regular_graph(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t max_attempts) {
  if (d >= n) throw Error(ErrorKind::invalid_parameter, "random regular graph needs d < n");
  if ((n * d) % 2 != 0) throw Error(ErrorKind::invalid_parameter, "n*d must be even");
  if (n > std::numeric_limits<Vertex>::max()) throw Error(ErrorKind::capacity, "n too large");

  std::vector<Vertex> points(n * d);
  std::vector<Edge> edges;
  std::vector<Edge> sorted;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng = make_rng(derive_seed(seed, {attempt}));
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<Vertex>(i / d);
    std::shuffle(points.begin(), points.end(), rng);
    edges.clear();
    bool simple = true;
    for (std::size_t i = 0; i < points.size(); i += 2) {
      Vertex a = points[i], b = points[i + 1];
      if (a == b) {
        simple = false;
        break;
      }
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
    }
    if (!simple) continue;
    sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    return Graph(n, std::move(sorted), Family::random_regular, false);
  }
  throw Error(ErrorKind::sampling_failure,
              "no simple pairing after " + std::to_string(max_attempts) + " attempts");
}

bool is_prime(std::uint64_t x) noexcept {
  if (x < 2) return false;
  for (std::uint64_t f = 2; f * f <= x; ++f)
    if (x % f == 0) return false;
  return true;
}

namespace {

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) result = result * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return result;
}

/// 2x2 matrix over GF(q), row-major.
struct Mat2 {
  std::uint64_t a, b, c, d;
};

Mat2 multiply(const Mat2& x, const Mat2& y, std::uint64_t q) {
  return {(x.a * y.a + x.b * y.c) % q, (x.a * y.b + x.b * y.d) % q, (x.c * y.a + x.d * y.c) % q,
          (x.c * y.b + x.d * y.d) % q};
}

/// Projective representative: scale so the first nonzero entry is 1.
Mat2 normalize(const Mat2& m, std::uint64_t q) {
  const std::uint64_t lead = m.a != 0 ? m.a : m.b != 0 ? m.b : m.c != 0 ? m.c : m.d;
  const std::uint64_t inv = pow_mod(lead, q - 2, q);
  return {m.a * inv % q, m.b * inv % q, m.c * inv % q, m.d * inv % q};
}

std::uint64_t key(const Mat2& m, std::uint64_t q) { return ((m.a * q + m.b) * q + m.c) * q + m.d; }

std::uint64_t mod(std::int64_t x, std::uint64_t q) {
  const auto qq = static_cast<std::int64_t>(q);
  return static_cast<std::uint64_t>(((x % qq) + qq) % qq);
}

}  // namespace

Graph lps_ramanujan_graph(std::uint64_t p, std::uint64_t q) {
  if (!is_prime(p) || !is_prime(q)) throw Error(ErrorKind::invalid_parameter, "p and q must be prime");
  if (p == q) throw Error(ErrorKind::invalid_parameter, "p and q must be distinct");
  if (p % 4 != 1 || q % 4 != 1) throw Error(ErrorKind::invalid_parameter, "p and q must be 1 mod 4");
  if (static_cast<double>(q) <= 2.0 * std::sqrt(static_cast<double>(p)))
    throw Error(ErrorKind::invalid_parameter, "need q > 2 sqrt(p)");
  if (q > 1000) throw Error(ErrorKind::capacity, "q too large");

  std::uint64_t root = 0;  // square root of -1 mod q
  for (std::uint64_t x = 1; x < q; ++x)
    if (x * x % q == q - 1) {
      root = x;
      break;
    }

  // Quaternions a^2+b^2+c^2+d^2 = p, a odd positive, b, c, d even.
  std::vector<Mat2> gens;
  const auto bound = static_cast<std::int64_t>(std::sqrt(static_cast<double>(p))) + 1;
  for (std::int64_t a = 1; a <= bound; a += 2)
    for (std::int64_t b = -bound; b <= bound; ++b)
      for (std::int64_t c = -bound; c <= bound; ++c)
        for (std::int64_t d = -bound; d <= bound; ++d) {
          if (b % 2 != 0 || c % 2 != 0 || d % 2 != 0) continue;
          if (a * a + b * b + c * c + d * d != static_cast<std::int64_t>(p)) continue;
          const auto i = static_cast<std::int64_t>(root);
          Mat2 m{mod(a + b * i, q), mod(c + d * i, q), mod(-c + d * i, q), mod(a - b * i, q)};
          gens.push_back(normalize(m, q));
        }
  if (gens.size() != p + 1)
    throw Error(ErrorKind::invalid_parameter, "unexpected generator count " + std::to_string(gens.size()));

  std::unordered_map<std::uint64_t, Vertex> ids;
  std::vector<Mat2> elements;
  const Mat2 identity{1, 0, 0, 1};
  ids.emplace(key(identity, q), 0);
  elements.push_back(identity);
  std::vector<Edge> edges;
  for (std::size_t head = 0; head < elements.size(); ++head) {
    const Mat2 g = elements[head];
    for (const auto& s : gens) {
      const Mat2 h = normalize(multiply(g, s, q), q);
      auto [it, inserted] = ids.emplace(key(h, q), static_cast<Vertex>(elements.size()));
      if (inserted) elements.push_back(h);
      const Vertex u = static_cast<Vertex>(head), v = it->second;
      if (u < v) edges.push_back({u, v});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g(elements.size(), std::move(edges), Family::lps, true);
  if (g.regular_degree() != p + 1)
    throw Error(ErrorKind::invalid_structure, "LPS construction did not produce a (p+1)-regular graph");
  return g;
}

// Edge-list IO -------------------------------------------------------------

Graph read_edge_list(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw Error(ErrorKind::io, "missing 'n m' header");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    long long u = 0, v = 0;
    if (!(in >> u >> v)) throw Error(ErrorKind::io, "expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    if (u < 0 || v < 0 || u >= static_cast<long long>(n) || v >= static_cast<long long>(n))
      throw Error(ErrorKind::invalid_structure, "edge endpoint out of range on line " + std::to_string(i + 2));
    if (u >= v)
      throw Error(ErrorKind::invalid_structure, "edge line " + std::to_string(i + 2) + " must have u < v");
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorKind::io, "trailing content after " + std::to_string(m) + " edges");
  return Graph(n, std::move(edges));
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  write_edge_list(out, g);
}

// Diagnostics --------------------------------------------------------------

std::optional<std::size_t> girth(const Graph& g) {
  const std::size_t n = g.num_vertices();
  constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
  std::size_t best = unseen;
  std::vector<std::size_t> dist(n, unseen);
  std::vector<Vertex> parent(n);
  std::vector<Vertex> touched;
  std::vector<Vertex> queue;
  for (Vertex root = 0; root < n; ++root) {
    queue.clear();
    queue.push_back(root);
    dist[root] = 0;
    parent[root] = root;
    touched.push_back(root);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Vertex x = queue[head];
      // Any cycle found from here on has length >= 2*dist[x]+1.
      if (best != unseen && 2 * dist[x] + 1 >= best) break;
      for (Vertex y : g.neighbors(x)) {
        if (dist[y] == unseen) {
          dist[y] = dist[x] + 1;
          parent[y] = x;
          touched.push_back(y);
          queue.push_back(y);
        } else if (parent[x] != y) {
          best = std::min(best, dist[x] + dist[y] + 1);
        }
      }
    }
    for (Vertex t : touched) dist[t] = unseen;
    touched.clear();
    if (best == 3) break;
  }
  if (best == unseen) return std::nullopt;
  return best;
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.num_vertices();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const Vertex x = stack.back();
    stack.pop_back();
    for (Vertex y : g.neighbors(x))
      if (!seen[y]) {
        seen[y] = 1;
        ++count;
        stack.push_back(y);
      }
  }
  return count == n;
}

std::optional<std::vector<std::uint8_t>> bipartition(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::uint8_t> side(n, 2);
  std::vector<Vertex> stack;
  for (Vertex s = 0; s < n; ++s) {
    if (side[s] != 2) continue;
    side[s] = 0;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : g.neighbors(x)) {
        if (side[y] == 2) {
          side[y] = static_cast<std::uint8_t>(1 - side[x]);
          stack.push_back(y);
        } else if (side[y] == side[x]) {
          return std::nullopt;
        }
      }
    }
  }
  return side;
}

double spectral_expansion(const Graph& g, double tol, std::size_t max_iterations) {
  const std::size_t n = g.num_vertices();
  if (n == 0 || !is_connected(g)) throw Error(ErrorKind::disconnected, "spectral expansion needs a connected graph");
  if (n == 1) return 0.0;

  Eigen::VectorXd sqrt_deg(n);
  for (Vertex v = 0; v < n; ++v) sqrt_deg[v] = std::sqrt(static_cast<double>(g.degree(v)));

  std::vector<Eigen::VectorXd> trivial;
  trivial.push_back(sqrt_deg.normalized());
  if (auto sides = bipartition(g)) {
    Eigen::VectorXd alt = sqrt_deg;
    for (Vertex v = 0; v < n; ++v)
      if ((*sides)[v]) alt[v] = -alt[v];
    trivial.push_back(alt.normalized());
  }
  const auto deflate = [&](Eigen::VectorXd& x) {
    for (const auto& t : trivial) x -= t.dot(x) * t;
  };
  const auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (Vertex v = 0; v < n; ++v) {
      double acc = 0.0;
      for (Vertex u : g.neighbors(v)) acc += x[u] / sqrt_deg[u];
      y[v] = acc / sqrt_deg[v];
    }
    return y;
  };

  Rng rng = make_rng(0x5eed5eedULL);
  Eigen::VectorXd x(n);
  for (Vertex v = 0; v < n; ++v) x[v] = uniform01(rng) - 0.5;
  deflate(x);
  if (x.norm() < 1e-12) return 0.0;
  x.normalize();

  double estimate = 0.0;
  std::size_t stable = 0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd y = apply(x);
    deflate(y);
    const double norm = y.norm();
    if (norm < 1e-14) return 0.0;
    // Two applications per update so +lambda/-lambda pairs do not oscillate.
    Eigen::VectorXd z = apply(y / norm);
    deflate(z);
    const double next = std::sqrt(norm * z.norm());
    x = z.normalized();
    if (std::abs(next - estimate) < 1e-3 * tol) {
      if (++stable >= 5) return next;
    } else {
      stable = 0;
    }
    estimate = next;
  }
  return estimate;
}

GraphDiagnostics diagnose(const Graph& g, bool with_spectrum, double tol) {
  GraphDiagnostics d;
  d.girth = girth(g);
  d.is_regular = g.regular_degree().has_value();
  d.degree = g.regular_degree().value_or(0);
  d.is_bipartite = is_bipartite(g);
  if (with_spectrum && is_connected(g)) d.lambda_star = spectral_expansion(g, tol);
  return d;
}

}  // namespace mfperc
