// Command-line front end: graph generation, exact and sampled NBRW profiles,
// condition tables, tree and coupling checks, percolation and the sweeps.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfperc/conditions.hpp"
#include "mfperc/coupling.hpp"
#include "mfperc/error.hpp"
#include "mfperc/graph.hpp"
#include "mfperc/harness.hpp"
#include "mfperc/nbrw.hpp"
#include "mfperc/percolation.hpp"
#include "mfperc/tree.hpp"

using namespace mfperc;

namespace {

std::map<std::string, std::uint64_t> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::invalid_parameter, "expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = std::stoull(item.substr(eq + 1));
  }
  return out;
}

std::uint64_t need(const std::map<std::string, std::uint64_t>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw Error(ErrorKind::invalid_parameter, "missing parameter '" + key + "'");
  return it->second;
}

Graph generate(const std::string& family, const std::map<std::string, std::uint64_t>& params) {
  if (family == "complete") return complete_graph(need(params, "n"));
  if (family == "hamming") return hamming_graph(need(params, "k"), need(params, "m"));
  if (family == "regular") {
    auto it = params.find("seed");
    return random_regular_graph(need(params, "n"), need(params, "d"), it == params.end() ? 1 : it->second);
  }
  if (family == "lps") return lps_ramanujan_graph(need(params, "p"), need(params, "q"));
  throw Error(ErrorKind::invalid_parameter, "unknown family '" + family + "'");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

void print_assertions(const std::vector<AssertionResult>& results) {
  for (const auto& a : results)
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.description << "  " << a.detail << '\n';
}

int run_config(ExperimentConfig cfg, const std::string& out_dir) {
  const std::string dir = output_directory(out_dir.empty() ? cfg.output_dir : out_dir);
  const auto start = std::chrono::steady_clock::now();
  std::vector<AssertionResult> assertions;
  const std::string stem = to_string(cfg.kind);
  switch (cfg.kind) {
    case ExperimentKind::window:
    case ExperimentKind::supercritical: {
      const auto table = cfg.kind == ExperimentKind::window ? run_window_sweep(cfg) : run_supercritical_sweep(cfg);
      auto trials = open_out(dir, stem + "_trials.csv");
      write_trials_csv(trials, table.rows);
      std::vector<CellSummary> cells;
      for (const char* col : {"c1_scaled", "c1_over_2eps_n", "diam_scaled", "mix_scaled"}) {
        auto s = summarize(table.rows, col);
        cells.insert(cells.end(), s.begin(), s.end());
      }
      auto summary = open_out(dir, stem + "_summary.csv");
      write_summary_csv(summary, cells);
      write_summary_csv(std::cout, cells);
      assertions = table.assertions;
      break;
    }
    case ExperimentKind::conditions: {
      const auto table = run_condition_tables(cfg);
      auto out = open_out(dir, stem + ".csv");
      write_conditions_csv(out, table.rows);
      write_conditions_csv(std::cout, table.rows);
      assertions = table.assertions;
      break;
    }
    case ExperimentKind::coupling: {
      const auto rows = run_coupling_experiment(cfg);
      auto out = open_out(dir, stem + ".csv");
      write_coupling_csv(out, rows);
      write_coupling_csv(std::cout, rows);
      std::size_t bad = 0;
      for (const auto& r : rows) bad += r.violations;
      assertions.push_back({"coupling inequality on every sample", bad == 0, std::to_string(bad) + " violations"});
      break;
    }
    case ExperimentKind::tree: {
      const auto rows = run_tree_experiment(cfg);
      auto out = open_out(dir, stem + ".csv");
      write_tree_csv(out, rows);
      write_tree_csv(std::cout, rows);
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.lower_holds && r.upper_holds;
      assertions.push_back({"survival bounds on the grid", ok, ""});
      break;
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto manifest = open_out(dir, stem + "_manifest.json");
  manifest << run_manifest_json(cfg, wall, assertions) << '\n';
  print_assertions(assertions);
  for (const auto& a : assertions)
    if (!a.passed) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field percolation on finite transitive graphs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a graph and write its edge list");
  std::string family, out_file;
  std::vector<std::string> params;
  gen->add_option("--family", family, "complete | hamming | regular | lps")->required();
  gen->add_option("--params", params, "key=value pairs: n, k, m, d, seed, p, q")->required();
  gen->add_option("--out", out_file, "output edge-list file")->required();

  // nbrw
  auto* nbrw = app.add_subcommand("nbrw", "non-backtracking return profile");
  std::string graph_file;
  Vertex vertex = 0;
  std::size_t steps = 10, samples = 0;
  std::uint64_t seed = 1;
  bool exact = false;
  nbrw->add_option("--graph", graph_file)->required();
  nbrw->add_option("--vertex", vertex);
  nbrw->add_option("--steps", steps)->required();
  auto* exact_flag = nbrw->add_flag("--exact", exact);
  nbrw->add_option("--samples", samples)->excludes(exact_flag);
  nbrw->add_option("--seed", seed);

  // conditions
  auto* cond = app.add_subcommand("conditions", "mean-field condition table over a family");
  std::string cond_family, eps_rule, config_file, out_dir;
  std::uint64_t cond_k = 2, cond_p = 5, cond_d = 3;
  std::vector<std::uint64_t> cond_m, cond_n, cond_q;
  bool spectrum = false;
  cond->add_option("--family", cond_family, "complete | hamming | lps | regular");
  cond->add_option("--k", cond_k);
  cond->add_option("--m", cond_m)->delimiter(',');
  cond->add_option("--n", cond_n)->delimiter(',');
  cond->add_option("--d", cond_d);
  cond->add_option("--p", cond_p);
  cond->add_option("--q", cond_q)->delimiter(',');
  cond->add_option("--eps-rule", eps_rule, "e.g. n^-0.25 or 0.5*n^-0.3");
  cond->add_flag("--spectrum", spectrum, "also compute lambda*");
  cond->add_option("--config", config_file);
  cond->add_option("--out", out_dir);

  // tree-check
  auto* tree = app.add_subcommand("tree-check", "survival and moment checks on the d-regular tree");
  std::size_t tree_d = 3, tree_r = 100, mc_trials = 0;
  double tree_eps = 0.1;
  tree->add_option("--d", tree_d);
  tree->add_option("--eps", tree_eps)->required();
  tree->add_option("--r", tree_r)->required();
  tree->add_option("--mc-trials", mc_trials);
  tree->add_option("--seed", seed);

  // coupling-check
  auto* coup = app.add_subcommand("coupling-check", "covering-tree coupling inequality");
  double p = 0.5;
  std::size_t r = 3, trials = 1000, a_size = 0, threads = 1;
  coup->add_option("--graph", graph_file)->required();
  coup->add_option("--p", p)->required();
  coup->add_option("--r", r)->required();
  coup->add_option("--trials", trials)->required();
  coup->add_option("--a-size", a_size);
  coup->add_option("--vertex", vertex);
  coup->add_option("--seed", seed);
  coup->add_option("--threads", threads);

  // percolate
  auto* perc = app.add_subcommand("percolate", "largest-component statistics of G_p");
  std::string stats;
  perc->add_option("--graph", graph_file)->required();
  perc->add_option("--p", p)->required();
  perc->add_option("--trials", trials)->required();
  perc->add_option("--stats", stats, "comma list of diam, mix");
  perc->add_option("--seed", seed);

  // explore
  auto* expl = app.add_subcommand("explore", "multi-root exploration process");
  std::size_t M = 10, t_max = 100;
  bool keep_going = false;
  expl->add_option("--graph", graph_file)->required();
  expl->add_option("--p", p)->required();
  expl->add_option("--r", r)->required();
  expl->add_option("--M", M)->required();
  expl->add_option("--Tmax", t_max)->required();
  expl->add_option("--seed", seed);
  expl->add_flag("--no-stop", keep_going, "continue after the first large ball");

  // window / supercritical / run
  auto* window = app.add_subcommand("window", "scaling-window sweep from a config file");
  window->add_option("--config", config_file)->required();
  window->add_option("--out", out_dir);
  auto* super = app.add_subcommand("supercritical", "supercritical sweep from a config file");
  super->add_option("--config", config_file)->required();
  super->add_option("--out", out_dir);
  auto* run = app.add_subcommand("run", "run any experiment config");
  run->add_option("--config", config_file)->required();
  run->add_option("--out", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    std::cout << std::setprecision(12);
    if (gen->parsed()) {
      const Graph g = generate(family, parse_params(params));
      write_edge_list_file(out_file, g);
      std::cerr << "n=" << g.num_vertices() << " m=" << g.num_edges() << '\n';
      return 0;
    }
    if (nbrw->parsed()) {
      const Graph g = read_edge_list_file(graph_file);
      if (samples > 0) {
        Rng rng = make_rng(seed);
        const auto prof = sample_return_probabilities(g, vertex, steps, samples, rng);
        std::cout << "s,R,se\n";
        for (std::size_t s = 1; s <= steps; ++s)
          std::cout << s << ',' << prof.frequency[s] << ',' << prof.standard_error[s] << '\n';
      } else {
        const auto prof = return_probabilities(g, vertex, steps);
        std::cout << "s,R\n";
        for (std::size_t s = 1; s <= steps; ++s) std::cout << s << ',' << prof[s] << '\n';
      }
      return 0;
    }
    if (cond->parsed()) {
      ExperimentConfig cfg;
      if (!config_file.empty()) {
        cfg = ExperimentConfig::from_json_file(config_file);
      } else {
        if (cond_family.empty()) throw Error(ErrorKind::invalid_parameter, "--family or --config is required");
        cfg.kind = ExperimentKind::conditions;
        cfg.family.name = cond_family;
        cfg.family.k = cond_k;
        cfg.family.m = cond_m;
        cfg.family.n = cond_n;
        cfg.family.d = cond_d;
        cfg.family.p = cond_p;
        cfg.family.q = cond_q;
        cfg.with_spectrum = spectrum;
        if (!eps_rule.empty()) {
          const auto c = ExperimentConfig::from_json_text(
              R"({"kind":"conditions","family":{"name":"complete","n":[4]},"eps_rule":")" + eps_rule + "\"}");
          cfg.eps_rule = c.eps_rule;
        }
        cfg.validate();
      }
      if (cfg.kind != ExperimentKind::conditions)
        throw Error(ErrorKind::invalid_parameter, "config kind must be 'conditions'");
      if (!config_file.empty()) return run_config(cfg, out_dir);
      const auto table = run_condition_tables(cfg);
      std::cout << "n,d,girth,S1,eps,r,S2\n";
      for (const auto& row : table.rows) {
        std::cout << row.n << ',' << row.d << ',' << (row.girth ? std::to_string(*row.girth) : "inf") << ','
                  << row.s1 << ',';
        if (row.eps) std::cout << *row.eps;
        std::cout << ',';
        if (row.r) std::cout << *row.r;
        std::cout << ',';
        if (row.s2) std::cout << *row.s2;
        if (row.lambda_star) std::cout << ",lambda*=" << *row.lambda_star;
        std::cout << '\n';
      }
      return 0;
    }
    if (tree->parsed()) {
      Rng rng = make_rng(seed);
      std::vector<TreeLemmaReport> rows{lemma7_checks(tree_d, tree_eps, tree_r, mc_trials, &rng),
                                        lemma8_checks(tree_d, tree_eps, tree_r, mc_trials, &rng)};
      write_tree_csv(std::cout, rows);
      return rows[0].lower_holds && rows[0].upper_holds && rows[1].lower_holds && rows[1].upper_holds ? 0 : 1;
    }
    if (coup->parsed()) {
      const Graph g = read_edge_list_file(graph_file);
      const auto row = run_coupling_check(g, graph_file, vertex, p, r, a_size, trials, seed, threads);
      std::cout << (row.violations == 0 ? "PASS" : "FAIL") << " trials=" << row.trials
                << " violations=" << row.violations << " strict_witnesses=" << row.strict_witnesses << '\n';
      return row.violations == 0 ? 0 : 1;
    }
    if (perc->parsed()) {
      const Graph g = read_edge_list_file(graph_file);
      const bool want_diam = stats.find("diam") != std::string::npos;
      const bool want_mix = stats.find("mix") != std::string::npos;
      GraphInstance inst{"file", graph_file, g.num_vertices(), g.regular_degree().value_or(0), {}, graph_file};
      std::cout << "trial,C1,diam,mix\n";
      for (std::size_t t = 0; t < trials; ++t) {
        const auto st = percolate_instance(inst, &g, p, derive_seed(seed, {t}), want_diam, want_mix);
        std::cout << t << ',' << st.c1_size << ',';
        if (st.diameter) std::cout << *st.diameter;
        std::cout << ',';
        if (st.mixing_time) std::cout << *st.mixing_time;
        std::cout << '\n';
      }
      return 0;
    }
    if (expl->parsed()) {
      const Graph g = read_edge_list_file(graph_file);
      Rng rng = make_rng(seed);
      const auto outcome = multi_root_process(g, p, r, M, t_max, rng, !keep_going);
      std::cout << "t,root,ball,I,explored\n";
      for (const auto& s : outcome.steps)
        std::cout << s.t << ',' << s.root << ',' << s.ball_size << ',' << s.success << ',' << s.explored << '\n';
      std::cout << "# first_success=" << (outcome.first_success ? std::to_string(*outcome.first_success) : "none")
                << " halted=" << to_string(outcome.halted_reason) << '\n';
      return 0;
    }
    ExperimentConfig cfg = ExperimentConfig::from_json_file(config_file);
    if (window->parsed() && cfg.kind != ExperimentKind::window)
      throw Error(ErrorKind::invalid_parameter, "config kind must be 'window'");
    if (super->parsed() && cfg.kind != ExperimentKind::supercritical)
      throw Error(ErrorKind::invalid_parameter, "config kind must be 'supercritical'");
    return run_config(cfg, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
