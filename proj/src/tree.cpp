#include "mfperc/tree.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mfperc/error.hpp"

namespace mfperc {

namespace {

void check_tree(std::size_t d, double p) {
  if (d < 3) throw Error(ErrorKind::invalid_parameter, "tree degree must be >= 3");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_parameter, "p must lie in [0, 1]");
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::invalid_parameter, "eps must lie in (0, 1/2)");
}

double ipow(double base, std::size_t e) { return std::pow(base, static_cast<double>(e)); }

}  // namespace

TreeParams TreeParams::supercritical(std::size_t d, double eps) {
  check_eps(eps);
  TreeParams t{d, (1.0 + eps) / static_cast<double>(d - 1), eps};
  check_tree(d, t.p);
  return t;
}

TreeParams TreeParams::subcritical(std::size_t d, double eps) {
  check_eps(eps);
  TreeParams t{d, (1.0 - eps) / static_cast<double>(d - 1), eps};
  check_tree(d, t.p);
  return t;
}

double level_mean(std::size_t d, double p, std::size_t r) {
  check_tree(d, p);
  if (r == 0) return 1.0;
  return static_cast<double>(d) * ipow(static_cast<double>(d - 1), r - 1) * ipow(p, r);
}

double level_second_moment(std::size_t d, double p, std::size_t r) {
  check_tree(d, p);
  if (r == 0) return 1.0;
  const double dd = static_cast<double>(d);
  const double dm1 = dd - 1.0;
  // Unordered pairs at level r whose meet sits at depth j; j = r is the diagonal.
  double total = dd * ipow(dm1, r - 1) * ipow(p, r);
  total += 2.0 * (dd * ipow(dm1, 2 * r - 1) / 2.0) * ipow(p, 2 * r);
  for (std::size_t j = 1; j < r; ++j)
    total += 2.0 * (dd * (dd - 2.0) * ipow(dm1, 2 * r - j - 2) / 2.0) * ipow(p, 2 * r - j);
  return total;
}

double effective_resistance(std::size_t d, double p, std::size_t r) {
  check_tree(d, p);
  if (r == 0) return 0.0;
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  const double dd = static_cast<double>(d);
  double total = 0.0;
  for (std::size_t i = 1; i <= r; ++i)
    total += (1.0 - p) / ipow(p, i) / (dd * ipow(dd - 1.0, i - 1));
  return total;
}

SurvivalBounds survival_bounds(std::size_t d, double p, std::size_t r) {
  const double res = effective_resistance(d, p, r);
  if (std::isinf(res)) return {0.0, 0.0};
  return {1.0 / (1.0 + res), std::min(1.0, 2.0 / (1.0 + res))};
}

double survival_exact(std::size_t d, double p, std::size_t r) {
  check_tree(d, p);
  if (r == 0) return 1.0;
  // 1 - (1 - x)^k via expm1/log1p keeps precision when p u is tiny.
  auto hit = [](double x, std::size_t k) { return -std::expm1(static_cast<double>(k) * std::log1p(-x)); };
  double u = 1.0;
  for (std::size_t k = 1; k < r; ++k) u = hit(p * u, d - 1);
  return hit(p * u, d);
}

double conditional_window_moment(std::size_t d, double p, std::size_t r) {
  check_tree(d, p);
  const std::size_t half = r / 2;
  const double growth = p * static_cast<double>(d - 1);
  // E[H_a H_b] = growth^{a-b} E[H_b^2] for a >= b >= 1; H_0 = 1.
  double total = 0.0;
  for (std::size_t b = half; b <= r; ++b) {
    const double second = level_second_moment(d, p, b);
    total += second;
    for (std::size_t a = b + 1; a <= r; ++a) {
      const double cross = b == 0 ? level_mean(d, p, a) : ipow(growth, a - b) * second;
      total += 2.0 * cross;
    }
  }
  const double cond = survival_exact(d, p, half);
  if (cond == 0.0) return 0.0;
  return total / cond;
}

LevelSample sample_tree_levels(std::size_t d, double p, std::size_t r, Rng& rng, std::size_t node_cap) {
  check_tree(d, p);
  LevelSample sample;
  sample.levels.assign(r + 1, 0);
  sample.levels[0] = 1;
  std::size_t materialized = 1;
  for (std::size_t k = 1; k <= r; ++k) {
    const std::size_t slots = k == 1 ? d : sample.levels[k - 1] * (d - 1);
    if (slots == 0) break;
    std::binomial_distribution<std::size_t> draw(slots, p);
    sample.levels[k] = draw(rng);
    materialized += sample.levels[k];
    if (materialized > node_cap) {
      sample.truncated = true;
      break;
    }
  }
  return sample;
}

namespace {

TreeLemmaReport tree_lemma(std::size_t d, double eps, std::size_t r, int sign, std::size_t mc_trials,
                           Rng* rng) {
  check_eps(eps);
  if (r < 1) throw Error(ErrorKind::invalid_parameter, "r must be >= 1");
  TreeLemmaReport rep;
  rep.d = d;
  rep.eps = eps;
  rep.sign = sign;
  rep.r = r;
  rep.p = (1.0 + sign * eps) / static_cast<double>(d - 1);
  check_tree(d, rep.p);
  rep.survival = survival_exact(d, rep.p, r);
  rep.lyons = survival_bounds(d, rep.p, r);
  const double rr = static_cast<double>(r);
  double moment_scale = 0.0, window_scale = 0.0;
  if (sign > 0) {
    rep.lower_bound = eps / 2.0;
    rep.upper_bound = 12.0 * eps / (1.0 - std::exp(-eps * rr / 2.0));
    moment_scale = std::pow(1.0 + eps, 2.0 * rr) / eps;
    window_scale = std::pow(1.0 + eps, 2.0 * rr) / std::pow(eps, 4.0);
  } else {
    rep.lower_bound = eps * std::pow(1.0 - eps, rr) / 2.0;
    rep.upper_bound = 12.0 / rr;
    moment_scale = std::pow(1.0 - eps, rr) / eps;
    window_scale = rr / std::pow(eps, 3.0);
  }
  rep.lower_holds = rep.survival >= rep.lower_bound;
  rep.upper_holds = rep.survival <= rep.upper_bound;
  rep.second_moment_ratio = level_second_moment(d, rep.p, r) / moment_scale;
  rep.conditional_moment = conditional_window_moment(d, rep.p, r);
  rep.conditional_moment_ratio = rep.conditional_moment / window_scale;

  if (mc_trials > 0) {
    if (rng == nullptr) throw Error(ErrorKind::invalid_parameter, "Monte-Carlo check needs an rng");
    const std::size_t half = r / 2;
    double acc = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < mc_trials; ++i) {
      const auto s = sample_tree_levels(d, rep.p, r, *rng);
      if (s.levels[half] == 0) continue;
      double window = 0.0;
      for (std::size_t k = half; k <= r; ++k) window += static_cast<double>(s.levels[k]);
      acc += window * window;
      ++kept;
    }
    rep.mc_trials = mc_trials;
    rep.mc_conditioned = kept;
    if (kept > 0) {
      rep.mc_conditional_moment = acc / static_cast<double>(kept);
      rep.mc_conditional_moment_ratio = *rep.mc_conditional_moment / window_scale;
    }
  }
  return rep;
}

}  // namespace

TreeLemmaReport lemma7_checks(std::size_t d, double eps, std::size_t r, std::size_t mc_trials, Rng* rng) {
  return tree_lemma(d, eps, r, +1, mc_trials, rng);
}

TreeLemmaReport lemma8_checks(std::size_t d, double eps, std::size_t r, std::size_t mc_trials, Rng* rng) {
  return tree_lemma(d, eps, r, -1, mc_trials, rng);
}

}  // namespace mfperc
