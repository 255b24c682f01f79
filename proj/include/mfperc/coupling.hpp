#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mfperc/graph.hpp"
#include "mfperc/nbrw.hpp"
#include "mfperc/rng.hpp"

namespace mfperc {

using TreeNode = std::uint32_t;

/// Covering tree of a d-regular graph rooted at v, truncated at `depth`.
/// Nodes are stored in breadth-first order; a node's children are contiguous
/// and follow the sorted neighbour list of its label with the parent's label
/// removed.
struct LabelledTree {
  Vertex root_label = 0;
  std::size_t degree = 0;
  std::size_t depth = 0;
  std::vector<TreeNode> parent;  // parent[0] == 0 for the root
  std::vector<std::uint32_t> node_depth;
  std::vector<Vertex> label;
  std::vector<TreeNode> first_child;  // children are first_child[w] .. + child_count(w)
  std::vector<std::size_t> level_begin;  // nodes of depth k occupy [level_begin[k], level_begin[k+1])

  std::size_t size() const noexcept { return label.size(); }
  std::size_t child_count(TreeNode w) const noexcept {
    if (node_depth[w] >= depth) return 0;
    return w == 0 ? degree : degree - 1;
  }
};

/// Matches the d = 3, depth 8 tree: 1 + 3 (2^8 - 1) nodes.
constexpr std::size_t kDefaultCoveringNodes = 766;

/// Number of nodes of the depth-`depth` covering tree of a d-regular graph.
std::size_t covering_tree_size(std::size_t d, std::size_t depth);

/// Throws ErrorKind::capacity above `node_budget` nodes and
/// ErrorKind::invalid_structure unless g is regular with degree >= 3.
LabelledTree build_covering_tree(const Graph& g, Vertex v, std::size_t depth,
                                 std::size_t node_budget = kDefaultCoveringNodes);

/// Per-node classification of one percolation configuration on the tree.
/// open[w] is the state of the edge from w to its parent (open[0] unused).
struct PurityFlags {
  std::vector<std::uint8_t> connected;  // w <-> root
  std::vector<std::uint8_t> pure;
  std::vector<std::uint8_t> path_pure;  // w and every ancestor pure
};

/// w is impure when some u != w with |u| <= |w| and the same label is joined
/// to the meet of u and w by open edges. Exhaustive over same-label nodes.
PurityFlags classify_purity(const LabelledTree& tree, const std::vector<std::uint8_t>& open);

/// Joint draw of the restricted exploration of G_p from v and of T_p.
struct JointSample {
  std::size_t r = 0;
  double p = 0.0;
  // Tree side.
  std::vector<std::uint8_t> open;
  PurityFlags purity;
  std::vector<std::uint8_t> a_free;
  std::vector<std::size_t> H;  // H[k], k = 0..r
  std::vector<std::size_t> X;  // X[k], k = 0..r
  // Graph side: shells[k] = |{x : d^A_p(v, x) = k}|, height[x] = that
  // distance for vertices reached, kUnreached otherwise.
  std::vector<std::size_t> shells;
  std::vector<std::uint32_t> height;
  // Every examined graph edge with the tree node whose parent edge shares
  // its coin.
  struct LedgerEntry {
    EdgeId edge;
    TreeNode node;
    bool open;
  };
  std::vector<LedgerEntry> ledger;

  static constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();
};

/// Reuses one covering tree across many joint samples from the same root.
class CouplingSampler {
 public:
  CouplingSampler(const Graph& g, Vertex v, std::size_t r,
                  std::size_t node_budget = kDefaultCoveringNodes);

  const LabelledTree& tree() const noexcept { return tree_; }
  const Graph& graph() const noexcept { return *graph_; }
  Vertex root() const noexcept { return root_; }

  /// `forbidden` lists the vertices of A; v must not be among them.
  JointSample sample(double p, const std::vector<Vertex>& forbidden, Rng& rng) const;

 private:
  const Graph* graph_;
  Vertex root_;
  std::size_t r_;
  LabelledTree tree_;
};

JointSample joint_sample(const Graph& g, Vertex v, double p, std::size_t r,
                         const std::vector<Vertex>& forbidden, Rng& rng,
                         std::size_t node_budget = kDefaultCoveringNodes);

/// X[k] <= shells[k] <= H[k] for every k <= r.
bool check_coupling_inequality(const JointSample& js);

/// Some level with X[k] < shells[k].
bool strict_lower_witness(const JointSample& js);

/// sum_{h=2}^r sum_{k=2}^h sum_{j=1}^{k-1} growth^{k-j} R[h+k-2j-1].
/// Needs profile.horizon >= 2r - 3; throws ErrorKind::horizon otherwise.
double loop_triple_sum(const ReturnProfile& profile, double growth, std::size_t r);

/// (p(d-1))^r [1 - r|A|/n - d/(d-1) * loop_triple_sum(profile, p(d-1), r)].
double lemma12_lower_bound(const ReturnProfile& profile, std::size_t n, std::size_t d, double p,
                           std::size_t r, std::size_t a_size);

/// Uses the vertex-averaged profile of g.
double lemma12_lower_bound(const Graph& g, double p, std::size_t r, std::size_t a_size);

/// Hypotheses of the two ball-size lemmas at p = (1 + sign*eps)/(d-1), and
/// the eps-r factor of their conclusions with the constant left out.
struct BallLemmaAssumptions {
  int sign = +1;
  double eps = 0.0;
  std::size_t r = 0;
  std::size_t M = 0;
  double loop_sum = 0.0;  // d/(d-1) * loop_triple_sum(profile, 1 + sign*eps, r)
  bool loop_condition = false;  // loop_sum <= 1/2
  double size_threshold = 0.0;  // right-hand side compared against 96 M
  bool size_condition = false;  // 96 M < size_threshold
  double probability_shape = 0.0;
  double max_forbidden_fraction = 0.0;  // |A| / n allowed: 1 / (4r)
};

BallLemmaAssumptions lemma13_14_assumptions(const ReturnProfile& profile, std::size_t d, double eps,
                                            int sign, std::size_t r, std::size_t M);

BallLemmaAssumptions lemma13_14_assumptions(const Graph& g, double eps, int sign, std::size_t r,
                                            std::size_t M);

}  // namespace mfperc
