#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mfperc/rng.hpp"

namespace mfperc {

/// Bond percolation on the rooted infinite d-regular tree: the root has d
/// children and every other node d-1. H_r is the number of level-r nodes
/// joined to the root.
struct TreeParams {
  std::size_t d = 3;
  double p = 0.5;
  std::optional<double> eps;  // p = (1 +/- eps) / (d - 1) when set

  static TreeParams supercritical(std::size_t d, double eps);
  static TreeParams subcritical(std::size_t d, double eps);
};

/// E H_r = d (d-1)^{r-1} p^r (1 for r = 0).
double level_mean(std::size_t d, double p, std::size_t r);

/// Exact E H_r^2 summed over ordered pairs of level-r nodes.
double level_second_moment(std::size_t d, double p, std::size_t r);

/// Root-to-level-r resistance with resistance (1-p)/p^b on level-b edges.
/// +infinity when p == 0.
double effective_resistance(std::size_t d, double p, std::size_t r);

struct SurvivalBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Lyons: 1/(1+R_r) <= P(H_r > 0) <= min(1, 2/(1+R_r)).
SurvivalBounds survival_bounds(std::size_t d, double p, std::size_t r);

/// P(H_r > 0) by the branching recursion u_0 = 1,
/// u_k = 1 - (1 - p u_{k-1})^{d-1}, q_r = 1 - (1 - p u_{r-1})^d.
double survival_exact(std::size_t d, double p, std::size_t r);

/// E[(sum_{k=floor(r/2)}^{r} H_k)^2 | H_{floor(r/2)} > 0], exactly.
double conditional_window_moment(std::size_t d, double p, std::size_t r);

struct LevelSample {
  std::vector<std::size_t> levels;  // levels[k] = H_k, levels[0] = 1
  bool truncated = false;           // node cap hit; later levels unreliable
};

constexpr std::size_t kDefaultTreeNodeCap = 10'000'000;

/// One percolation sample of the level counts to depth r. Levels are drawn
/// as H_1 ~ Bin(d, p), H_{k+1} ~ Bin((d-1) H_k, p), which is the law of the
/// open subtree explored level by level.
LevelSample sample_tree_levels(std::size_t d, double p, std::size_t r, Rng& rng,
                               std::size_t node_cap = kDefaultTreeNodeCap);

/// Survival-estimate check on the tree with p = (1 + sign*eps)/(d-1).
struct TreeLemmaReport {
  std::size_t d = 0;
  double eps = 0.0;
  int sign = +1;
  std::size_t r = 0;
  double p = 0.0;
  double survival = 0.0;
  double lower_bound = 0.0;  // eps/2, or eps (1-eps)^r / 2
  double upper_bound = 0.0;  // 12 eps / (1 - e^{-eps r/2}), or 12 / r
  SurvivalBounds lyons;
  bool lower_holds = false;
  bool upper_holds = false;
  double second_moment_ratio = 0.0;       // E H_r^2 over its order term
  double conditional_moment = 0.0;        // exact conditional window moment
  double conditional_moment_ratio = 0.0;  // over its order term
  std::optional<double> mc_conditional_moment;
  std::optional<double> mc_conditional_moment_ratio;
  std::size_t mc_trials = 0;
  std::size_t mc_conditioned = 0;
};

/// Supercritical p = (1+eps)/(d-1). `mc_trials` > 0 adds a Monte-Carlo
/// estimate of the conditional window moment.
TreeLemmaReport lemma7_checks(std::size_t d, double eps, std::size_t r, std::size_t mc_trials = 0,
                              Rng* rng = nullptr);

/// Subcritical p = (1-eps)/(d-1).
TreeLemmaReport lemma8_checks(std::size_t d, double eps, std::size_t r, std::size_t mc_trials = 0,
                              Rng* rng = nullptr);

}  // namespace mfperc
