#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mfperc/graph.hpp"
#include "mfperc/percolation.hpp"
#include "mfperc/tree.hpp"

namespace mfperc {

enum class ExperimentKind { window, supercritical, conditions, coupling, tree };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(const std::string& name);

/// One member of a graph family. Complete graphs are never materialized for
/// percolation; their open edges are sampled directly.
struct GraphInstance {
  std::string family;  // complete | hamming | lps | regular | file
  std::string label;   // e.g. "H(2,20)"
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::uint64_t> params;
  std::string path;  // for family == "file"

  bool implicit_complete() const noexcept { return family == "complete"; }
  Graph build() const;
};

/// Family description: a name and parameter lists. The swept parameter is
/// the one given as a list (n for complete/regular, m for hamming, q for lps).
struct FamilySpec {
  std::string name;
  std::vector<std::uint64_t> n;  // complete, regular
  std::uint64_t k = 2;           // hamming dimension
  std::vector<std::uint64_t> m;  // hamming alphabet sizes
  std::uint64_t d = 3;           // regular degree
  std::uint64_t p = 5;           // lps
  std::vector<std::uint64_t> q;  // lps
  std::string path;              // file
  std::uint64_t graph_seed = 1;  // regular

  std::vector<GraphInstance> instances() const;
};

/// eps(n) = c n^{-a}; Theorem-3 regime requires a in (0, 1/3).
struct EpsRule {
  double c = 1.0;
  double a = 0.25;
  double operator()(std::size_t n) const;
};

/// Pass/fail check evaluated on a finished table.
/// Trial tables, with cells keyed by (n, swept parameter):
///   median_in_band     every cell median of `column` lies in [lo, hi]
///   median_increasing  within each n, cell medians strictly increase with the parameter
///   rate_at_least      in every cell, the fraction of rows with column in [lo, hi] is >= rate
/// Condition tables, one row per graph:
///   in_band            every row value lies in [lo, hi]
///   max_ratio          max over rows of value / value at reference_n is <= hi
///   strictly_decreasing, strictly_increasing   in n
struct Assertion {
  std::string type;
  std::string column;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double rate = 1.0;
  std::optional<std::size_t> only_n;  // restrict to one n
  std::optional<std::size_t> reference_n;
};

struct AssertionResult {
  std::string description;
  bool passed = false;
  std::string detail;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::window;
  FamilySpec family;
  std::vector<double> lambdas{0.0};
  std::optional<EpsRule> eps_rule;
  double delta = 0.01;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool with_diameter = false;
  bool with_mixing = false;
  bool with_spectrum = false;
  // coupling / tree kinds
  std::vector<double> p_values;
  std::size_t r = 3;
  std::vector<std::size_t> a_sizes{0};
  std::vector<std::size_t> tree_d{3};
  std::vector<double> eps_values;
  std::vector<std::size_t> radii;
  std::size_t mc_trials = 0;
  std::string output_dir;
  std::vector<Assertion> assertions;

  /// Throws ErrorKind::invalid_parameter on schema or regime violations.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
  void validate() const;
};

/// p = (1 + lambda n^{-1/3}) / (d - 1); throws unless p in [0, 1].
double window_p(std::size_t n, std::size_t d, double lambda);

/// One long-form output row. Column names follow `TrialRecord::columns()`.
struct TrialRecord {
  std::string graph;
  std::size_t n = 0;
  std::size_t d = 0;
  double p = 0.0;
  std::string param_name;  // lambda | eps
  double param = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t c1 = 0;
  double c1_scaled = 0.0;  // C1 n^{-2/3}
  std::optional<double> c1_over_2eps_n;
  std::optional<bool> threshold_hit;  // C1 >= delta eps n / ln^3(n eps^3)
  std::optional<std::size_t> diam;
  std::optional<double> diam_scaled;  // diam n^{-1/3}
  std::optional<bool> diam_exact;
  std::optional<std::size_t> mix;
  std::optional<double> mix_scaled;  // mix / n
  double runtime_ms = 0.0;

  static std::vector<std::string> columns();
  std::optional<double> value(const std::string& column) const;
};

struct TrialTable {
  std::vector<TrialRecord> rows;
  std::vector<AssertionResult> assertions;
  bool all_passed() const;
};

/// Percolate one instance once and collect component statistics; geometry
/// is added on request. Mixing is skipped (left empty) above kMixingSizeCap.
ComponentStats percolate_instance(const GraphInstance& inst, const Graph* graph, double p, std::uint64_t seed,
                                  bool with_diameter, bool with_mixing);

TrialTable run_window_sweep(const ExperimentConfig& cfg);
TrialTable run_supercritical_sweep(const ExperimentConfig& cfg);

struct ConditionRow {
  std::string graph;
  std::size_t n = 0;
  std::size_t d = 0;
  std::optional<std::size_t> girth;
  std::optional<double> lambda_star;
  double s1 = 0.0;
  std::optional<double> eps;
  std::optional<std::size_t> r;
  std::optional<double> s2;
  std::optional<double> girth_lhs;
  bool averaged_over_vertices = false;
};

struct ConditionTable {
  std::vector<ConditionRow> rows;
  std::vector<AssertionResult> assertions;
  bool all_passed() const;
};

ConditionTable run_condition_tables(const ExperimentConfig& cfg);

struct CouplingCheckRow {
  std::string graph;
  double p = 0.0;
  std::size_t r = 0;
  std::size_t a_size = 0;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t strict_witnesses = 0;
};

/// Coupling inequality on `trials` joint samples from root v; A is a fresh
/// uniform subset of V minus v of the requested size in each trial.
CouplingCheckRow run_coupling_check(const Graph& g, const std::string& label, Vertex v, double p, std::size_t r,
                                    std::size_t a_size, std::size_t trials, std::uint64_t seed,
                                    std::size_t threads = 1);

std::vector<CouplingCheckRow> run_coupling_experiment(const ExperimentConfig& cfg);
std::vector<TreeLemmaReport> run_tree_experiment(const ExperimentConfig& cfg);

/// Runs `body(i)` for i in [0, count) on up to `threads` workers. Results
/// must be written by index so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Linear-interpolation quantile (q in [0, 1]) of a non-empty sample.
double quantile(std::vector<double> values, double q);

struct CellSummary {
  std::size_t n = 0;
  double param = 0.0;
  std::string column;
  std::size_t count = 0;
  double q10 = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double mean = 0.0;
};

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& rows, const std::string& column);

std::vector<AssertionResult> evaluate_assertions(const std::vector<TrialRecord>& rows,
                                                 const std::vector<Assertion>& assertions);
std::vector<AssertionResult> evaluate_assertions(const std::vector<ConditionRow>& rows,
                                                 const std::vector<Assertion>& assertions);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& rows, bool with_runtime = true);
void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells);
void write_conditions_csv(std::ostream& out, const std::vector<ConditionRow>& rows);
void write_coupling_csv(std::ostream& out, const std::vector<CouplingCheckRow>& rows);
void write_tree_csv(std::ostream& out, const std::vector<TreeLemmaReport>& rows);

/// git describe of the source tree at build time.
const char* build_version() noexcept;

/// Run manifest: config, master seed, build version, wall time, assertion outcomes.
std::string run_manifest_json(const ExperimentConfig& cfg, double wall_seconds,
                              const std::vector<AssertionResult>& assertions);

/// Directory for experiment output: explicit value, else $MFPERC_OUT_DIR, else ".".
std::string output_directory(const std::string& explicit_dir);

}  // namespace mfperc
