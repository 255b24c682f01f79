#pragma once

#include <cstddef>
#include <optional>

#include "mfperc/graph.hpp"
#include "mfperc/nbrw.hpp"

namespace mfperc {

/// Mean-field statistics for one graph. Sums run over the s-traversal return
/// profile R[t]; upper limits are floored to integers and logs are natural.
struct ConditionReport {
  std::size_t n = 0;
  std::size_t d = 0;
  double s1 = 0.0;
  std::optional<double> eps;
  std::optional<std::size_t> r;
  std::optional<double> s2;
  bool averaged_over_vertices = false;
};

/// Largest L with L^3 <= n.
std::size_t integer_cube_root(std::size_t n) noexcept;

/// n^{1/3} * sum_{t=1}^{floor(n^{1/3})} t R[t]. Requires profile.horizon >= floor(n^{1/3}).
double condition1_statistic(const ReturnProfile& profile, std::size_t n);

/// Condition-(1) report for a regular graph of degree >= 3
/// (ErrorKind::out_of_model otherwise). Non-transitive graphs use the
/// vertex-averaged profile.
ConditionReport condition1(const Graph& g);

/// floor(eps^{-1} [ln(n eps^3) - 3 ln ln(n eps^3)]). Throws
/// ErrorKind::out_of_regime unless eps in (0, 1/2), n eps^3 > e and r >= 1.
std::size_t window_radius(std::size_t n, double eps);

/// eps^{-1} r sum_{t=1}^{2r} [(1+eps)^{min(t,r)} - 1] R[t] for an explicit r.
double condition2_statistic(const ReturnProfile& profile, double eps, std::size_t r);

/// Conditions (1) and (2) together, with r = window_radius(n, eps).
ConditionReport condition2(const Graph& g, double eps);

/// Piecewise return-probability bound for expanders with girth g_len:
/// 0 for t < g_len, (d-1)^{-floor(g_len/2)} for g_len <= t < C ln n, 4/n beyond.
double expander_pt_bound(std::size_t d, std::size_t g_len, std::size_t n, double mixing_constant,
                         std::size_t t);

/// C^2 n^{1/3} ln^2 n (d-1)^{-floor(g_len/2)} + 2.
double condition1_bound_expander(std::size_t d, std::size_t g_len, std::size_t n, double mixing_constant);

/// (d-1)^{-floor(g_len/2)} n^{1/3} ln^2 n, the girth-condition left-hand side.
double girth_condition_lhs(std::size_t d, std::size_t g_len, std::size_t n);

/// Return-probability bound on H(3, m) with d = 3(m-1), n = m^3.
double hamming3_pt_bound(std::size_t m, std::size_t t, double mixing_constant);

/// Smallest C such that R[t] <= level for every t in [C ln n, horizon].
/// `level` defaults to 4/n.
double fit_mixing_constant(const ReturnProfile& profile, std::size_t n,
                           std::optional<double> level = std::nullopt);

}  // namespace mfperc
