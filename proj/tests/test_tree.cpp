#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfperc/error.hpp"
#include "mfperc/tree.hpp"
#include "oracles.hpp"

using namespace mfperc;


TEST_CASE("level means") {
  CHECK(level_mean(3, 0.5, 1) == doctest::Approx(1.5));
  CHECK(level_mean(3, 0.5, 2) == doctest::Approx(1.5));
  CHECK(level_mean(4, 1.0 / 3.0, 3) == doctest::Approx(4.0 / 3.0));
  CHECK(level_mean(3, 0.5, 0) == 1.0);
}

TEST_CASE("level second moment") {
  CHECK(level_second_moment(3, 0.5, 1) == doctest::Approx(3.0));
  for (std::size_t d : {3, 4, 7})
    for (std::size_t r : {1, 2, 5}) {
      const double full = static_cast<double>(d) * std::pow(static_cast<double>(d - 1), static_cast<double>(r - 1));
      CHECK(level_second_moment(d, 1.0, r) == doctest::Approx(full * full));
    }
  for (double p : {0.3, 0.5, 0.8}) {
    for (std::size_t r : {1, 2, 3}) {
      const auto e = oracle::enumerate_tree(3, p, r);
      CHECK(level_second_moment(3, p, r) == doctest::Approx(e.h_sq).epsilon(1e-12));
      CHECK(survival_exact(3, p, r) == doctest::Approx(e.survival).epsilon(1e-12));
      CHECK(conditional_window_moment(3, p, r) == doctest::Approx(e.window_sq_given_alive).epsilon(1e-9));
    }
  }
  // Degree 4, depth 2 has 4 + 12 = 16 edges.
  const auto e4 = oracle::enumerate_tree(4, 0.4, 2);
  CHECK(level_second_moment(4, 0.4, 2) == doctest::Approx(e4.h_sq).epsilon(1e-12));
  CHECK(conditional_window_moment(4, 0.4, 2) == doctest::Approx(e4.window_sq_given_alive).epsilon(1e-9));
}

TEST_CASE("resistance and survival bounds") {
  CHECK(effective_resistance(3, 0.75, 1) == doctest::Approx(1.0 / 9.0));
  CHECK(effective_resistance(3, 0.75, 400) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(effective_resistance(5, 1.0, 10) == 0.0);
  CHECK(std::isinf(effective_resistance(3, 0.0, 4)));
  const auto b = survival_bounds(3, 0.75, 1);
  CHECK(b.lower == doctest::Approx(0.9));
  CHECK(b.upper == 1.0);
  CHECK(survival_exact(3, 0.75, 1) == doctest::Approx(0.984375));
  const auto full = survival_bounds(4, 1.0, 7);
  CHECK(full.lower == 1.0);
  CHECK(full.upper == 1.0);
  const auto dead = survival_bounds(4, 0.0, 3);
  CHECK(dead.lower == 0.0);
  CHECK(dead.upper == 0.0);

  CHECK(survival_exact(3, 0.5, 1) == doctest::Approx(0.875));
  CHECK(survival_exact(3, 0.5, 2) == doctest::Approx(0.755859375));

  for (std::size_t d : {3, 4, 5, 10})
    for (int i = 1; i <= 20; ++i) {
      const double p = i / 21.0;
      for (std::size_t r = 1; r <= 50; ++r) {
        const double q = survival_exact(d, p, r);
        const auto sb = survival_bounds(d, p, r);
        CHECK(sb.lower <= q + 1e-12);
        CHECK(q <= sb.upper + 1e-12);
      }
    }
}

TEST_CASE("survival is monotone") {
  for (std::size_t r = 1; r < 40; ++r) CHECK(survival_exact(3, 0.55, r + 1) <= survival_exact(3, 0.55, r));
  for (int i = 1; i < 20; ++i)
    CHECK(survival_exact(4, i / 20.0, 10) <= survival_exact(4, (i + 1) / 20.0, 10));
}

TEST_CASE("level sampling") {
  Rng rng = make_rng(3);
  const auto zero = sample_tree_levels(3, 0.0, 6, rng);
  CHECK(zero.levels.size() == 7);
  CHECK(zero.levels[0] == 1);
  for (std::size_t k = 1; k <= 6; ++k) CHECK(zero.levels[k] == 0);
  const auto one = sample_tree_levels(3, 1.0, 6, rng);
  for (std::size_t k = 1; k <= 6; ++k) CHECK(one.levels[k] == 3u << (k - 1));
  CHECK_FALSE(one.truncated);

  const std::size_t trials = 100000;
  double sum = 0.0, sum_sq = 0.0, alive = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto s = sample_tree_levels(3, 0.5, 4, rng);
    for (std::size_t k = 1; k <= 4; ++k) {
      if (s.levels[k - 1] == 0) CHECK(s.levels[k] == 0);
      CHECK(s.levels[k] <= 3u << (k - 1));
    }
    const double h = static_cast<double>(s.levels[2]);
    sum += h;
    sum_sq += h * h;
    alive += s.levels[4] > 0;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  CHECK(std::abs(mean - 1.5) <= 4.0 * se);
  const double q = survival_exact(3, 0.5, 4);
  CHECK(std::abs(alive / trials - q) <= 4.0 * std::sqrt(q * (1 - q) / trials));

  Rng a = make_rng(17), b = make_rng(17);
  CHECK(sample_tree_levels(4, 0.4, 12, a).levels == sample_tree_levels(4, 0.4, 12, b).levels);

  const auto big = sample_tree_levels(3, 1.0, 40, rng, 1000);
  CHECK(big.truncated);
  CHECK_THROWS_AS(sample_tree_levels(2, 0.5, 3, rng), Error);
  CHECK_THROWS_AS(sample_tree_levels(3, 1.5, 3, rng), Error);
}

TEST_CASE("survival estimates in the supercritical and subcritical regimes") {
  const auto sup = lemma7_checks(3, 0.1, 100);
  CHECK(sup.p == doctest::Approx(0.55));
  CHECK(sup.lower_bound == doctest::Approx(0.05));
  CHECK(sup.upper_bound == doctest::Approx(1.2 / (1 - std::exp(-5.0))));
  CHECK(sup.lower_holds);
  CHECK(sup.upper_holds);
  CHECK(sup.survival == doctest::Approx(survival_exact(3, 0.55, 100)));

  const auto sub = lemma8_checks(3, 0.1, 200);
  CHECK(sub.p == doctest::Approx(0.45));
  CHECK(sub.upper_bound == doctest::Approx(0.06));
  CHECK(sub.lower_bound == doctest::Approx(0.05 * std::pow(0.9, 200)));
  CHECK(sub.lower_holds);
  CHECK(sub.upper_holds);

  for (double eps : {0.05, 0.1, 0.2, 0.4})
    for (std::size_t r = 10; r <= 200; r += 10) {
      CHECK(lemma7_checks(3, eps, r).lower_holds);
      CHECK(lemma7_checks(3, eps, r).upper_holds);
      CHECK(lemma8_checks(3, eps, r).lower_holds);
      CHECK(lemma8_checks(3, eps, r).upper_holds);
    }

  // Bounded ratio of the conditional window moment to its order term.
  double lo = 1e300, hi = 0.0;
  for (std::size_t r = 20; r <= 60; r += 5) {
    const double ratio = lemma7_checks(3, 0.1, r).conditional_moment_ratio;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 50.0);

  Rng rng = make_rng(8);
  const auto mc = lemma7_checks(3, 0.2, 10, 20000, &rng);
  REQUIRE(mc.mc_conditional_moment.has_value());
  CHECK(*mc.mc_conditional_moment == doctest::Approx(mc.conditional_moment).epsilon(0.1));
  CHECK(mc.mc_conditioned > 0);

  CHECK_THROWS_AS(lemma7_checks(3, 0.5, 10), Error);
  CHECK_THROWS_AS(lemma8_checks(3, 0.0, 10), Error);
  CHECK_THROWS_AS(TreeParams::supercritical(2, 0.1), Error);
}
