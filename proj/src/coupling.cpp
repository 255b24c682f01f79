#include "mfperc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "mfperc/error.hpp"

namespace mfperc {

std::size_t covering_tree_size(std::size_t d, std::size_t depth) {
  std::size_t total = 1, level = 1;
  for (std::size_t k = 1; k <= depth; ++k) {
    const std::size_t factor = k == 1 ? d : d - 1;
    if (level > std::numeric_limits<std::size_t>::max() / factor) return std::numeric_limits<std::size_t>::max();
    level *= factor;
    if (total > std::numeric_limits<std::size_t>::max() - level) return std::numeric_limits<std::size_t>::max();
    total += level;
  }
  return total;
}

LabelledTree build_covering_tree(const Graph& g, Vertex v, std::size_t depth, std::size_t node_budget) {
  const auto d = g.regular_degree();
  if (!d || *d < 3) throw Error(ErrorKind::invalid_structure, "covering tree needs a regular graph of degree >= 3");
  if (v >= g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "vertex out of range");
  const std::size_t total = covering_tree_size(*d, depth);
  if (total > node_budget || total > std::numeric_limits<TreeNode>::max())
    throw Error(ErrorKind::capacity, "covering tree of depth " + std::to_string(depth) + " needs " +
                                         std::to_string(total) + " nodes, budget " + std::to_string(node_budget));
  LabelledTree t;
  t.root_label = v;
  t.degree = *d;
  t.depth = depth;
  t.parent.reserve(total);
  t.node_depth.reserve(total);
  t.label.reserve(total);
  t.first_child.assign(total, 0);
  t.parent.push_back(0);
  t.node_depth.push_back(0);
  t.label.push_back(v);
  t.level_begin = {0, 1};
  for (std::size_t k = 0; k < depth; ++k) {
    for (std::size_t w = t.level_begin[k]; w < t.level_begin[k + 1]; ++w) {
      t.first_child[w] = static_cast<TreeNode>(t.label.size());
      const Vertex x = t.label[w];
      const bool is_root = w == 0;
      for (Vertex y : g.neighbors(x)) {
        if (!is_root && y == t.label[t.parent[w]]) continue;
        t.parent.push_back(static_cast<TreeNode>(w));
        t.node_depth.push_back(static_cast<std::uint32_t>(k + 1));
        t.label.push_back(y);
      }
    }
    t.level_begin.push_back(t.label.size());
  }
  return t;
}

PurityFlags classify_purity(const LabelledTree& tree, const std::vector<std::uint8_t>& open) {
  const std::size_t m = tree.size();
  if (open.size() != m) throw Error(ErrorKind::invalid_parameter, "open flags do not match the tree");
  PurityFlags f;
  f.connected.assign(m, 0);
  f.pure.assign(m, 1);
  f.path_pure.assign(m, 0);

  // top[u]: depth of the highest ancestor joined to u by open edges.
  std::vector<std::uint32_t> top(m, 0);
  f.connected[0] = 1;
  for (std::size_t u = 1; u < m; ++u) {
    const TreeNode par = tree.parent[u];
    top[u] = open[u] ? top[par] : tree.node_depth[u];
    f.connected[u] = open[u] && f.connected[par];
  }

  // Nodes grouped by label, in breadth-first (hence depth) order.
  std::vector<std::vector<TreeNode>> by_label;
  {
    Vertex max_label = 0;
    for (Vertex x : tree.label) max_label = std::max(max_label, x);
    by_label.resize(static_cast<std::size_t>(max_label) + 1);
    for (std::size_t w = 0; w < m; ++w) by_label[tree.label[w]].push_back(static_cast<TreeNode>(w));
  }

  auto meet_depth = [&](TreeNode a, TreeNode b) {
    while (tree.node_depth[a] > tree.node_depth[b]) a = tree.parent[a];
    while (tree.node_depth[b] > tree.node_depth[a]) b = tree.parent[b];
    while (a != b) {
      a = tree.parent[a];
      b = tree.parent[b];
    }
    return tree.node_depth[a];
  };

  for (std::size_t w = 1; w < m; ++w) {
    const auto dw = tree.node_depth[w];
    for (TreeNode u : by_label[tree.label[w]]) {
      if (tree.node_depth[u] > dw) break;
      if (u == w) continue;
      if (top[u] <= meet_depth(u, static_cast<TreeNode>(w))) {
        f.pure[w] = 0;
        break;
      }
    }
  }

  f.path_pure[0] = f.pure[0];
  for (std::size_t w = 1; w < m; ++w) f.path_pure[w] = f.pure[w] && f.path_pure[tree.parent[w]];
  return f;
}

CouplingSampler::CouplingSampler(const Graph& g, Vertex v, std::size_t r, std::size_t node_budget)
    : graph_(&g), root_(v), r_(r), tree_(build_covering_tree(g, v, r, node_budget)) {}

JointSample CouplingSampler::sample(double p, const std::vector<Vertex>& forbidden, Rng& rng) const {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_parameter, "p must lie in [0, 1]");
  const Graph& g = *graph_;
  const std::size_t n = g.num_vertices();
  std::vector<std::uint8_t> in_a(n, 0);
  for (Vertex a : forbidden) {
    if (a >= n) throw Error(ErrorKind::invalid_parameter, "forbidden vertex out of range");
    if (a == root_) throw Error(ErrorKind::invalid_parameter, "root lies in the forbidden set");
    in_a[a] = 1;
  }

  const LabelledTree& t = tree_;
  const std::size_t m = t.size();
  JointSample js;
  js.r = r_;
  js.p = p;
  js.open.assign(m, 0);
  std::vector<std::uint8_t> coined(m, 0);
  js.height.assign(n, JointSample::kUnreached);
  js.shells.assign(r_ + 1, 0);

  // Exploration queue of (graph vertex, corresponding tree node).
  std::deque<std::pair<Vertex, TreeNode>> queue;
  js.height[root_] = 0;
  queue.emplace_back(root_, 0);
  while (!queue.empty()) {
    const auto [x, w] = queue.front();
    queue.pop_front();
    const std::uint32_t hx = js.height[x];
    ++js.shells[hx];
    if (hx == r_) continue;
    // Children of w are in the order of x's neighbours, skipping the parent's label.
    TreeNode child = t.first_child[w];
    auto nb = g.neighbors(x);
    auto ids = g.incident_edges(x);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const Vertex y = nb[i];
      if (w != 0 && y == t.label[t.parent[w]]) continue;
      const TreeNode u = child++;
      if (in_a[y] || js.height[y] != JointSample::kUnreached) continue;
      const bool is_open = bernoulli(rng, p);
      js.open[u] = is_open;
      coined[u] = 1;
      js.ledger.push_back({ids[i], u, is_open});
      if (is_open) {
        js.height[y] = hx + 1;
        queue.emplace_back(y, u);
      }
    }
  }

  for (std::size_t u = 1; u < m; ++u)
    if (!coined[u]) js.open[u] = bernoulli(rng, p);

  js.purity = classify_purity(t, js.open);
  js.a_free.assign(m, 0);
  js.a_free[0] = 1;
  for (std::size_t u = 1; u < m; ++u) js.a_free[u] = !in_a[t.label[u]] && js.a_free[t.parent[u]];

  js.H.assign(r_ + 1, 0);
  js.X.assign(r_ + 1, 0);
  for (std::size_t u = 0; u < m; ++u) {
    if (!js.purity.connected[u]) continue;
    const auto k = t.node_depth[u];
    ++js.H[k];
    if (js.purity.path_pure[u] && js.a_free[u]) ++js.X[k];
  }
  return js;
}

JointSample joint_sample(const Graph& g, Vertex v, double p, std::size_t r, const std::vector<Vertex>& forbidden,
                         Rng& rng, std::size_t node_budget) {
  return CouplingSampler(g, v, r, node_budget).sample(p, forbidden, rng);
}

bool check_coupling_inequality(const JointSample& js) {
  for (std::size_t k = 0; k <= js.r; ++k)
    if (js.X[k] > js.shells[k] || js.shells[k] > js.H[k]) return false;
  return true;
}

bool strict_lower_witness(const JointSample& js) {
  for (std::size_t k = 0; k <= js.r; ++k)
    if (js.X[k] < js.shells[k]) return true;
  return false;
}

double loop_triple_sum(const ReturnProfile& profile, double growth, std::size_t r) {
  if (r < 2) return 0.0;
  const std::size_t needed = 2 * r - 3;
  if (profile.horizon < needed)
    throw Error(ErrorKind::horizon, "loop sum needs horizon " + std::to_string(needed));
  double total = 0.0;
  for (std::size_t h = 2; h <= r; ++h)
    for (std::size_t k = 2; k <= h; ++k)
      for (std::size_t j = 1; j < k; ++j)
        total += std::pow(growth, static_cast<double>(k - j)) * profile[h + k - 2 * j - 1];
  return total;
}

double lemma12_lower_bound(const ReturnProfile& profile, std::size_t n, std::size_t d, double p, std::size_t r,
                           std::size_t a_size) {
  if (d < 2) throw Error(ErrorKind::invalid_parameter, "degree must be >= 2");
  if (n == 0) throw Error(ErrorKind::invalid_parameter, "empty graph");
  const double dd = static_cast<double>(d);
  const double growth = p * (dd - 1.0);
  const double bracket = 1.0 - static_cast<double>(r) * static_cast<double>(a_size) / static_cast<double>(n) -
                         dd / (dd - 1.0) * loop_triple_sum(profile, growth, r);
  return std::pow(growth, static_cast<double>(r)) * bracket;
}

double lemma12_lower_bound(const Graph& g, double p, std::size_t r, std::size_t a_size) {
  const auto d = g.regular_degree();
  if (!d) throw Error(ErrorKind::invalid_structure, "lower bound needs a regular graph");
  const auto profile = average_return_probabilities(g, std::max<std::size_t>(1, 2 * r));
  return lemma12_lower_bound(profile, g.num_vertices(), *d, p, r, a_size);
}

BallLemmaAssumptions lemma13_14_assumptions(const ReturnProfile& profile, std::size_t d, double eps, int sign,
                                            std::size_t r, std::size_t M) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::invalid_parameter, "eps must lie in (0, 1/2)");
  if (sign != 1 && sign != -1) throw Error(ErrorKind::invalid_parameter, "sign must be +1 or -1");
  if (r < 1) throw Error(ErrorKind::invalid_parameter, "r must be >= 1");
  const double dd = static_cast<double>(d);
  const double rr = static_cast<double>(r);
  BallLemmaAssumptions out;
  out.sign = sign;
  out.eps = eps;
  out.r = r;
  out.M = M;
  out.loop_sum = dd / (dd - 1.0) * loop_triple_sum(profile, 1.0 + sign * eps, r);
  out.loop_condition = out.loop_sum <= 0.5;
  if (sign > 0) {
    const double decay = 1.0 - std::exp(-eps * rr / 4.0);
    out.size_threshold = (std::pow(1.0 + eps, rr) - std::pow(1.0 + eps, rr / 2.0)) * decay / (eps * eps);
    const double head = 1.0 - std::pow(1.0 + eps, -rr / 2.0);
    out.probability_shape = eps * head * head * decay * decay * decay;
  } else {
    const double gap = std::pow(1.0 - eps, rr / 2.0) - std::pow(1.0 - eps, rr);
    out.size_threshold = rr * gap / eps;
    out.probability_shape = eps * eps * eps * rr * rr * std::pow(1.0 - eps, rr) * gap * gap;
  }
  out.size_condition = 96.0 * static_cast<double>(M) < out.size_threshold;
  out.max_forbidden_fraction = 1.0 / (4.0 * rr);
  return out;
}

BallLemmaAssumptions lemma13_14_assumptions(const Graph& g, double eps, int sign, std::size_t r, std::size_t M) {
  const auto d = g.regular_degree();
  if (!d) throw Error(ErrorKind::invalid_structure, "ball lemmas need a regular graph");
  const auto profile = average_return_probabilities(g, std::max<std::size_t>(1, 2 * r));
  return lemma13_14_assumptions(profile, *d, eps, sign, r, M);
}

}  // namespace mfperc
