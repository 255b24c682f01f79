#include "mfperc/nbrw.hpp"

#include <algorithm>
#include <cmath>

#include "mfperc/error.hpp"

namespace mfperc {

DirectedEdgeSpace::DirectedEdgeSpace(const Graph& g) : graph_(&g) {
  if (g.num_vertices() > 0 && g.min_degree() < 2)
    throw Error(ErrorKind::invalid_structure, "non-backtracking walk needs minimum degree >= 2");
  const std::size_t m = g.num_directed_edges();
  tails_.resize(m);
  heads_.resize(m);
  reverse_.resize(m);
  for (Vertex x = 0; x < g.num_vertices(); ++x) {
    auto nb = g.neighbors(x);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const DirEdge e = g.offset(x) + i;
      const Vertex y = nb[i];
      tails_[e] = x;
      heads_[e] = y;
      auto back = g.neighbors(y);
      const auto pos = static_cast<std::size_t>(std::lower_bound(back.begin(), back.end(), x) - back.begin());
      reverse_[e] = g.offset(y) + pos;
    }
  }
}

DirEdge DirectedEdgeSpace::index(Vertex x, Vertex y) const {
  const Graph& g = *graph_;
  if (x >= g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "vertex out of range");
  auto nb = g.neighbors(x);
  auto it = std::lower_bound(nb.begin(), nb.end(), y);
  if (it == nb.end() || *it != y) throw Error(ErrorKind::invalid_parameter, "not an edge");
  return g.offset(x) + static_cast<std::size_t>(it - nb.begin());
}

std::vector<DirEdge> DirectedEdgeSpace::successors(DirEdge e) const {
  const Vertex y = heads_[e];
  const DirEdge back = reverse_[e];
  std::vector<DirEdge> out;
  for (std::size_t i = 0; i < graph_->degree(y); ++i) {
    const DirEdge f = graph_->offset(y) + i;
    if (f != back) out.push_back(f);
  }
  return out;
}

Eigen::VectorXd DirectedEdgeSpace::step(const Eigen::VectorXd& mass) const {
  const Graph& g = *graph_;
  const auto m = static_cast<Eigen::Index>(size());
  // Mass arriving at each vertex, then each out-edge (y, z) receives the
  // arrivals at y minus what came in along (z, y).
  Eigen::VectorXd arriving = head_marginal(mass);
  Eigen::VectorXd next(m);
  for (Vertex y = 0; y < g.num_vertices(); ++y) {
    const std::size_t begin = g.offset(y), end = begin + g.degree(y);
    const double scale = 1.0 / static_cast<double>(g.degree(y) - 1);
    for (std::size_t f = begin; f < end; ++f) next[static_cast<Eigen::Index>(f)] =
        (arriving[y] - mass[static_cast<Eigen::Index>(reverse_[f])]) * scale;
  }
  return next;
}

Eigen::VectorXd DirectedEdgeSpace::head_marginal(const Eigen::VectorXd& mass) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph_->num_vertices()));
  for (std::size_t e = 0; e < size(); ++e) out[heads_[e]] += mass[static_cast<Eigen::Index>(e)];
  return out;
}

Eigen::VectorXd DirectedEdgeSpace::start_at_vertex(Vertex v) const {
  const Graph& g = *graph_;
  if (v >= g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "vertex out of range");
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  const double share = 1.0 / static_cast<double>(g.degree(v));
  for (std::size_t i = 0; i < g.degree(v); ++i) mass[static_cast<Eigen::Index>(g.offset(v) + i)] = share;
  return mass;
}

Eigen::VectorXd DirectedEdgeSpace::start_at_edge(DirEdge e) const {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  mass[static_cast<Eigen::Index>(e)] = 1.0;
  return mass;
}

std::size_t default_horizon(const Graph& g) {
  const double n = static_cast<double>(g.num_vertices());
  const auto cube = static_cast<std::size_t>(std::ceil(std::cbrt(n) - 1e-9));
  return 2 * cube + girth(g).value_or(0);
}

namespace {

void check_horizon(std::size_t horizon) {
  if (horizon < 1) throw Error(ErrorKind::invalid_parameter, "horizon must be >= 1");
  if (horizon > kMaxHorizon) throw Error(ErrorKind::capacity, "horizon exceeds cap");
}

std::vector<double> profile_from(const DirectedEdgeSpace& space, Vertex v, std::size_t horizon) {
  std::vector<double> values(horizon + 1, 0.0);
  values[0] = 1.0;
  Eigen::VectorXd mass = space.start_at_vertex(v);
  const Graph& g = space.graph();
  for (std::size_t s = 1; s <= horizon; ++s) {
    if (s > 1) mass = space.step(mass);
    // Mass on edges into v: the reverses of v's out-edges.
    double back = 0.0;
    for (std::size_t i = 0; i < g.degree(v); ++i)
      back += mass[static_cast<Eigen::Index>(space.reverse(g.offset(v) + i))];
    values[s] = back;
  }
  return values;
}

}  // namespace

ReturnProfile return_probabilities(const Graph& g, Vertex v, std::size_t horizon) {
  check_horizon(horizon);
  DirectedEdgeSpace space(g);
  ReturnProfile profile;
  profile.origin = v;
  profile.horizon = horizon;
  profile.values = profile_from(space, v, horizon);
  return profile;
}

ReturnProfile average_return_probabilities(const Graph& g, std::size_t horizon) {
  check_horizon(horizon);
  DirectedEdgeSpace space(g);
  ReturnProfile profile;
  profile.horizon = horizon;
  profile.averaged_over_vertices = true;
  if (g.vertex_transitive()) {
    profile.values = profile_from(space, 0, horizon);
    return profile;
  }
  profile.values.assign(horizon + 1, 0.0);
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const auto values = profile_from(space, v, horizon);
    for (std::size_t s = 0; s <= horizon; ++s) profile.values[s] += values[s];
  }
  for (auto& x : profile.values) x /= static_cast<double>(g.num_vertices());
  return profile;
}

std::vector<Vertex> sample_nbrw(const Graph& g, Vertex v, std::size_t steps, Rng& rng) {
  if (g.min_degree() < 2) throw Error(ErrorKind::invalid_structure, "non-backtracking walk needs minimum degree >= 2");
  if (v >= g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "vertex out of range");
  std::vector<Vertex> path;
  path.reserve(steps + 1);
  path.push_back(v);
  if (steps == 0) return path;
  {
    auto nb = g.neighbors(v);
    path.push_back(nb[uniform_below(rng, nb.size())]);
  }
  for (std::size_t s = 1; s < steps; ++s) {
    const Vertex prev = path[path.size() - 2];
    const Vertex cur = path.back();
    auto nb = g.neighbors(cur);
    // Choose uniformly among the deg-1 neighbors other than prev.
    std::size_t pick = uniform_below(rng, nb.size() - 1);
    if (nb[pick] == prev) pick = nb.size() - 1;
    path.push_back(nb[pick]);
  }
  return path;
}

SampledReturnProfile sample_return_probabilities(const Graph& g, Vertex v, std::size_t horizon,
                                                 std::size_t samples, Rng& rng) {
  check_horizon(horizon);
  if (samples == 0) throw Error(ErrorKind::invalid_parameter, "need at least one sample");
  SampledReturnProfile out;
  out.samples = samples;
  std::vector<std::size_t> hits(horizon + 1, 0);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto path = sample_nbrw(g, v, horizon, rng);
    for (std::size_t s = 0; s <= horizon; ++s)
      if (path[s] == v) ++hits[s];
  }
  out.frequency.resize(horizon + 1);
  out.standard_error.resize(horizon + 1);
  const double count = static_cast<double>(samples);
  for (std::size_t s = 0; s <= horizon; ++s) {
    const double f = static_cast<double>(hits[s]) / count;
    out.frequency[s] = f;
    out.standard_error[s] = std::sqrt(f * (1.0 - f) / count);
  }
  return out;
}

LoopIdentity loop_identity(const Graph& g, Vertex v, std::size_t t, std::size_t t2) {
  const auto d = g.regular_degree();
  if (!d) throw Error(ErrorKind::invalid_structure, "loop identity needs a regular graph");
  if (v >= g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "vertex out of range");
  DirectedEdgeSpace space(g);
  const auto n = static_cast<Eigen::Index>(g.num_vertices());

  // sum_i and sum_i of the products, per vertex y.
  Eigen::VectorXd sum_a = Eigen::VectorXd::Zero(n), sum_b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < *d; ++i) {
    const DirEdge first = g.offset(v) + i;
    Eigen::VectorXd a = space.start_at_edge(first);
    Eigen::VectorXd b = a;
    for (std::size_t s = 0; s < t; ++s) a = space.step(a);
    for (std::size_t s = 0; s < t2; ++s) b = space.step(b);
    const Eigen::VectorXd ya = space.head_marginal(a), yb = space.head_marginal(b);
    sum_a += ya;
    sum_b += yb;
    diagonal += ya.cwiseProduct(yb);
  }
  LoopIdentity out;
  out.lhs = sum_a.dot(sum_b) - diagonal.sum();
  const auto profile = return_probabilities(g, v, t + t2 + 2);
  out.rhs = static_cast<double>(*d) * static_cast<double>(*d - 1) * profile[t + t2 + 2];
  return out;
}

}  // namespace mfperc
