#include "mfperc/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfperc/error.hpp"

namespace mfperc {

std::size_t integer_cube_root(std::size_t n) noexcept {
  auto root = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
  while (root > 0 && root * root * root > n) --root;
  while ((root + 1) * (root + 1) * (root + 1) <= n) ++root;
  return root;
}

double condition1_statistic(const ReturnProfile& profile, std::size_t n) {
  const std::size_t limit = integer_cube_root(n);
  if (profile.horizon < limit)
    throw Error(ErrorKind::horizon, "condition (1) needs horizon " + std::to_string(limit));
  double sum = 0.0;
  for (std::size_t t = 1; t <= limit; ++t) sum += static_cast<double>(t) * profile[t];
  return std::cbrt(static_cast<double>(n)) * sum;
}

namespace {

std::size_t model_degree(const Graph& g) {
  const auto d = g.regular_degree();
  if (!d) throw Error(ErrorKind::invalid_structure, "mean-field conditions need a regular graph");
  if (*d < 3) throw Error(ErrorKind::out_of_model, "degree must be >= 3, got " + std::to_string(*d));
  return *d;
}

}  // namespace

ConditionReport condition1(const Graph& g) {
  ConditionReport report;
  report.n = g.num_vertices();
  report.d = model_degree(g);
  const std::size_t limit = std::max<std::size_t>(1, integer_cube_root(report.n));
  const auto profile = average_return_probabilities(g, limit);
  report.s1 = condition1_statistic(profile, report.n);
  report.averaged_over_vertices = !g.vertex_transitive();
  return report;
}

std::size_t window_radius(std::size_t n, double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw Error(ErrorKind::out_of_regime, "eps must lie in (0, 1/2), got " + std::to_string(eps));
  const double x = static_cast<double>(n) * eps * eps * eps;
  if (!(x > std::exp(1.0)))
    throw Error(ErrorKind::out_of_regime, "n eps^3 must exceed e, got " + std::to_string(x));
  const double r = (std::log(x) - 3.0 * std::log(std::log(x))) / eps;
  if (!(r >= 1.0)) throw Error(ErrorKind::out_of_regime, "window radius below 1: " + std::to_string(r));
  return static_cast<std::size_t>(std::floor(r));
}

double condition2_statistic(const ReturnProfile& profile, double eps, std::size_t r) {
  if (profile.horizon < 2 * r)
    throw Error(ErrorKind::horizon, "condition (2) needs horizon " + std::to_string(2 * r));
  double sum = 0.0;
  for (std::size_t t = 1; t <= 2 * r; ++t) {
    const double weight = std::pow(1.0 + eps, static_cast<double>(std::min(t, r))) - 1.0;
    sum += weight * profile[t];
  }
  return static_cast<double>(r) * sum / eps;
}

ConditionReport condition2(const Graph& g, double eps) {
  ConditionReport report;
  report.n = g.num_vertices();
  report.d = model_degree(g);
  const std::size_t r = window_radius(report.n, eps);
  const std::size_t limit = std::max<std::size_t>(1, integer_cube_root(report.n));
  const auto profile = average_return_probabilities(g, std::max(limit, 2 * r));
  report.s1 = condition1_statistic(profile, report.n);
  report.eps = eps;
  report.r = r;
  report.s2 = condition2_statistic(profile, eps, r);
  report.averaged_over_vertices = !g.vertex_transitive();
  return report;
}

namespace {

bool beyond_mixing(std::size_t t, std::size_t n, double c) {
  return static_cast<double>(t) >= c * std::log(static_cast<double>(n)) - 1e-12;
}

double girth_term(std::size_t d, std::size_t g_len) {
  return std::pow(1.0 / static_cast<double>(d - 1), static_cast<double>(g_len / 2));
}

}  // namespace

double expander_pt_bound(std::size_t d, std::size_t g_len, std::size_t n, double mixing_constant,
                         std::size_t t) {
  if (t < g_len) return 0.0;
  if (!beyond_mixing(t, n, mixing_constant)) return girth_term(d, g_len);
  return 4.0 / static_cast<double>(n);
}

double condition1_bound_expander(std::size_t d, std::size_t g_len, std::size_t n, double mixing_constant) {
  const double log_n = std::log(static_cast<double>(n));
  return mixing_constant * mixing_constant * std::cbrt(static_cast<double>(n)) * log_n * log_n *
             girth_term(d, g_len) +
         2.0;
}

double girth_condition_lhs(std::size_t d, std::size_t g_len, std::size_t n) {
  const double log_n = std::log(static_cast<double>(n));
  return girth_term(d, g_len) * std::cbrt(static_cast<double>(n)) * log_n * log_n;
}

double hamming3_pt_bound(std::size_t m, std::size_t t, double mixing_constant) {
  if (m < 2) throw Error(ErrorKind::invalid_parameter, "hamming bound needs m >= 2");
  const std::size_t n = m * m * m;
  const double dm1 = static_cast<double>(3 * (m - 1) - 1);
  if (t < 3) return 0.0;
  if (!beyond_mixing(t, n, mixing_constant))
    return 3.0 / dm1 * (std::pow(2.0 / 3.0, static_cast<double>(t - 1)) + static_cast<double>(t) / dm1);
  return 2.0 / static_cast<double>(n);
}

double fit_mixing_constant(const ReturnProfile& profile, std::size_t n, std::optional<double> level) {
  const double cut = level.value_or(4.0 / static_cast<double>(n));
  std::size_t first = profile.horizon + 1;
  for (std::size_t t = profile.horizon; t >= 1; --t) {
    if (profile[t] > cut) break;
    first = t;
  }
  return static_cast<double>(first) / std::log(static_cast<double>(n));
}

}  // namespace mfperc
