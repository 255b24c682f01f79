#include "mfperc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfperc/conditions.hpp"
#include "mfperc/coupling.hpp"
#include "mfperc/error.hpp"
#include "mfperc/nbrw.hpp"

#ifndef MFPERC_GIT_DESCRIBE
#define MFPERC_GIT_DESCRIBE "unknown"
#endif

namespace mfperc {

using Json = nlohmann::json;

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::window: return "window";
    case ExperimentKind::supercritical: return "supercritical";
    case ExperimentKind::conditions: return "conditions";
    case ExperimentKind::coupling: return "coupling";
    case ExperimentKind::tree: return "tree";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::window, ExperimentKind::supercritical, ExperimentKind::conditions,
                 ExperimentKind::coupling, ExperimentKind::tree})
    if (name == to_string(k)) return k;
  throw Error(ErrorKind::invalid_parameter, "unknown experiment kind '" + name + "'");
}

// Families -----------------------------------------------------------------

namespace {

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t e, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  while (e > 0) {
    if (e & 1) result = result * base % mod;
    base = base * base % mod;
    e >>= 1;
  }
  return result;
}

}  // namespace

Graph GraphInstance::build() const {
  if (family == "complete") return complete_graph(params.at(0));
  if (family == "hamming") return hamming_graph(params.at(0), params.at(1));
  if (family == "lps") return lps_ramanujan_graph(params.at(0), params.at(1));
  if (family == "regular") return random_regular_graph(params.at(0), params.at(1), params.at(2));
  if (family == "file") return read_edge_list_file(path);
  throw Error(ErrorKind::invalid_parameter, "unknown family '" + family + "'");
}

std::vector<GraphInstance> FamilySpec::instances() const {
  std::vector<GraphInstance> out;
  if (name == "complete") {
    for (auto n_ : n) {
      if (n_ < 2) throw Error(ErrorKind::invalid_parameter, "complete graph needs n >= 2");
      out.push_back({name, "K_" + std::to_string(n_), n_, n_ - 1, {n_}, {}});
    }
  } else if (name == "hamming") {
    for (auto m_ : m) {
      if (k < 1 || m_ < 2) throw Error(ErrorKind::invalid_parameter, "hamming family needs k >= 1, m >= 2");
      const double size = std::pow(static_cast<double>(m_), static_cast<double>(k));
      if (size > 1e9) throw Error(ErrorKind::capacity, "hamming graph too large");
      std::size_t nn = 1;
      for (std::uint64_t i = 0; i < k; ++i) nn *= m_;
      out.push_back({name, "H(" + std::to_string(k) + "," + std::to_string(m_) + ")", nn, k * (m_ - 1), {k, m_}, {}});
    }
  } else if (name == "lps") {
    for (auto q_ : q) {
      if (!is_prime(p) || !is_prime(q_) || p == q_ || p % 4 != 1 || q_ % 4 != 1)
        throw Error(ErrorKind::invalid_parameter, "lps family needs distinct primes = 1 mod 4");
      const bool residue = pow_mod(p, (q_ - 1) / 2, q_) == 1;
      const std::size_t nn = residue ? q_ * (q_ * q_ - 1) / 2 : q_ * (q_ * q_ - 1);
      out.push_back({name, "LPS(" + std::to_string(p) + "," + std::to_string(q_) + ")", nn, p + 1, {p, q_}, {}});
    }
  } else if (name == "regular") {
    for (auto n_ : n)
      out.push_back({name, "RR(" + std::to_string(n_) + "," + std::to_string(d) + ")", n_, d, {n_, d, graph_seed}, {}});
  } else if (name == "file") {
    const Graph g = read_edge_list_file(path);
    out.push_back({name, path, g.num_vertices(), g.regular_degree().value_or(0), {}, path});
  } else {
    throw Error(ErrorKind::invalid_parameter, "unknown family '" + name + "'");
  }
  return out;
}

double EpsRule::operator()(std::size_t n) const { return c * std::pow(static_cast<double>(n), -a); }

// Config -------------------------------------------------------------------

namespace {

template <class T>
std::vector<T> as_list(const Json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

EpsRule parse_eps_rule(const Json& j) {
  EpsRule rule;
  if (j.is_object()) {
    rule.c = j.value("c", 1.0);
    rule.a = j.at("a").get<double>();
    return rule;
  }
  // Text form "[c*]n^-a".
  std::string s = j.get<std::string>();
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  const auto star = s.find('*');
  if (star != std::string::npos) {
    rule.c = std::stod(s.substr(0, star));
    s = s.substr(star + 1);
  }
  if (s.rfind("n^-", 0) != 0) throw Error(ErrorKind::invalid_parameter, "eps rule must look like c*n^-a");
  rule.a = std::stod(s.substr(3));
  return rule;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ExperimentConfig cfg;
  try {
    const Json j = Json::parse(text);
    cfg.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    if (j.contains("family")) {
      const Json& f = j.at("family");
      cfg.family.name = f.at("name").get<std::string>();
      if (f.contains("n")) cfg.family.n = as_list<std::uint64_t>(f.at("n"));
      if (f.contains("k")) cfg.family.k = f.at("k").get<std::uint64_t>();
      if (f.contains("m")) cfg.family.m = as_list<std::uint64_t>(f.at("m"));
      if (f.contains("d")) cfg.family.d = f.at("d").get<std::uint64_t>();
      if (f.contains("p")) cfg.family.p = f.at("p").get<std::uint64_t>();
      if (f.contains("q")) cfg.family.q = as_list<std::uint64_t>(f.at("q"));
      if (f.contains("path")) cfg.family.path = f.at("path").get<std::string>();
      if (f.contains("graph_seed")) cfg.family.graph_seed = f.at("graph_seed").get<std::uint64_t>();
    }
    if (j.contains("lambda")) cfg.lambdas = as_list<double>(j.at("lambda"));
    if (j.contains("eps_rule")) cfg.eps_rule = parse_eps_rule(j.at("eps_rule"));
    cfg.delta = j.value("delta", cfg.delta);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("stats")) {
      for (const auto& s : j.at("stats").get<std::vector<std::string>>()) {
        if (s == "diam") cfg.with_diameter = true;
        else if (s == "mix") cfg.with_mixing = true;
        else throw Error(ErrorKind::invalid_parameter, "unknown stat '" + s + "'");
      }
    }
    cfg.with_spectrum = j.value("spectrum", cfg.with_spectrum);
    if (j.contains("p")) cfg.p_values = as_list<double>(j.at("p"));
    cfg.r = j.value("r", cfg.r);
    if (j.contains("a_size")) cfg.a_sizes = as_list<std::size_t>(j.at("a_size"));
    if (j.contains("d")) cfg.tree_d = as_list<std::size_t>(j.at("d"));
    if (j.contains("eps")) cfg.eps_values = as_list<double>(j.at("eps"));
    if (j.contains("radii")) cfg.radii = as_list<std::size_t>(j.at("radii"));
    cfg.mc_trials = j.value("mc_trials", cfg.mc_trials);
    cfg.output_dir = j.value("output", cfg.output_dir);
    if (j.contains("assertions")) {
      for (const auto& a : j.at("assertions")) {
        Assertion as;
        as.type = a.at("type").get<std::string>();
        as.column = a.at("column").get<std::string>();
        if (a.contains("lo")) as.lo = a.at("lo").get<double>();
        if (a.contains("hi")) as.hi = a.at("hi").get<double>();
        as.rate = a.value("rate", 1.0);
        if (a.contains("n")) as.only_n = a.at("n").get<std::size_t>();
        if (a.contains("reference_n")) as.reference_n = a.at("reference_n").get<std::size_t>();
        cfg.assertions.push_back(as);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_parameter, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  Json j;
  j["kind"] = to_string(kind);
  Json f;
  f["name"] = family.name;
  if (!family.n.empty()) f["n"] = family.n;
  if (family.name == "hamming") f["k"] = family.k, f["m"] = family.m;
  if (family.name == "regular") f["d"] = family.d, f["graph_seed"] = family.graph_seed;
  if (family.name == "lps") f["p"] = family.p, f["q"] = family.q;
  if (!family.path.empty()) f["path"] = family.path;
  j["family"] = f;
  j["lambda"] = lambdas;
  if (eps_rule) j["eps_rule"] = {{"c", eps_rule->c}, {"a", eps_rule->a}};
  j["delta"] = delta;
  j["trials"] = trials;
  j["seed"] = seed;
  j["threads"] = threads;
  std::vector<std::string> stats;
  if (with_diameter) stats.push_back("diam");
  if (with_mixing) stats.push_back("mix");
  j["stats"] = stats;
  j["spectrum"] = with_spectrum;
  if (!p_values.empty()) j["p"] = p_values;
  j["r"] = r;
  j["a_size"] = a_sizes;
  j["d"] = tree_d;
  if (!eps_values.empty()) j["eps"] = eps_values;
  if (!radii.empty()) j["radii"] = radii;
  j["mc_trials"] = mc_trials;
  if (!output_dir.empty()) j["output"] = output_dir;
  Json as = Json::array();
  for (const auto& a : assertions) {
    Json x{{"type", a.type}, {"column", a.column}, {"rate", a.rate}};
    if (std::isfinite(a.lo)) x["lo"] = a.lo;
    if (std::isfinite(a.hi)) x["hi"] = a.hi;
    if (a.only_n) x["n"] = *a.only_n;
    if (a.reference_n) x["reference_n"] = *a.reference_n;
    as.push_back(x);
  }
  j["assertions"] = as;
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_parameter, msg); };
  if (trials < 1) fail("trials must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  for (double l : lambdas)
    if (!std::isfinite(l)) fail("lambda must be finite");
  if (eps_rule) {
    if (!(eps_rule->c > 0.0)) fail("eps rule constant must be positive");
    if (!(eps_rule->a > 0.0 && eps_rule->a < 1.0 / 3.0))
      throw Error(ErrorKind::out_of_regime, "eps rule exponent must lie in (0, 1/3), got " + std::to_string(eps_rule->a));
  }
  if (kind == ExperimentKind::supercritical && !eps_rule) fail("supercritical sweep needs an eps rule");
  if (kind != ExperimentKind::tree && family.name.empty()) fail("config needs a family");
  if (kind == ExperimentKind::coupling && p_values.empty()) fail("coupling experiment needs p values");
  if (kind == ExperimentKind::tree && (eps_values.empty() || radii.empty())) fail("tree experiment needs eps and radii");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) fail("p values must lie in [0, 1]");
  static const std::set<std::string> known{"median_in_band", "median_increasing", "rate_at_least", "in_band",
                                           "max_ratio", "strictly_decreasing", "strictly_increasing"};
  for (const auto& a : assertions)
    if (!known.count(a.type)) fail("unknown assertion type '" + a.type + "'");
}

double window_p(std::size_t n, std::size_t d, double lambda) {
  if (d < 2) throw Error(ErrorKind::invalid_parameter, "degree must be >= 2");
  const double p = (1.0 + lambda * std::pow(static_cast<double>(n), -1.0 / 3.0)) / static_cast<double>(d - 1);
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorKind::invalid_parameter, "p = " + std::to_string(p) + " outside [0, 1]");
  return p;
}

// Records ------------------------------------------------------------------

std::vector<std::string> TrialRecord::columns() {
  return {"graph", "n", "d", "p", "param_name", "param", "trial", "seed", "c1", "c1_scaled", "c1_over_2eps_n",
          "threshold_hit", "diam", "diam_scaled", "diam_exact", "mix", "mix_scaled", "runtime_ms"};
}

std::optional<double> TrialRecord::value(const std::string& column) const {
  auto opt = [](const auto& o) -> std::optional<double> {
    if (!o) return std::nullopt;
    return static_cast<double>(*o);
  };
  if (column == "n") return static_cast<double>(n);
  if (column == "d") return static_cast<double>(d);
  if (column == "p") return p;
  if (column == "param") return param;
  if (column == "c1") return static_cast<double>(c1);
  if (column == "c1_scaled") return c1_scaled;
  if (column == "c1_over_2eps_n") return c1_over_2eps_n;
  if (column == "threshold_hit") return opt(threshold_hit);
  if (column == "diam") return opt(diam);
  if (column == "diam_scaled") return diam_scaled;
  if (column == "mix") return opt(mix);
  if (column == "mix_scaled") return mix_scaled;
  if (column == "runtime_ms") return runtime_ms;
  throw Error(ErrorKind::invalid_parameter, "unknown column '" + column + "'");
}

bool TrialTable::all_passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

bool ConditionTable::all_passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

// Drivers ------------------------------------------------------------------

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ComponentStats percolate_instance(const GraphInstance& inst, const Graph* graph, double p, std::uint64_t seed,
                                  bool with_diameter, bool with_mixing) {
  ComponentStats stats;
  std::optional<Graph> open_graph;
  if (inst.implicit_complete()) {
    Rng rng = make_rng(seed);
    const auto edges = sample_complete_percolation(inst.n, p, rng);
    stats = component_stats(inst.n, edges);
    if (with_diameter || with_mixing) open_graph.emplace(inst.n, edges);
  } else {
    if (graph == nullptr) throw Error(ErrorKind::invalid_parameter, "instance graph not built");
    const auto mask = sample_percolation(*graph, p, seed);
    stats = component_stats(*graph, mask);
    if (with_diameter || with_mixing) open_graph.emplace(percolated_subgraph(*graph, mask));
  }
  if (with_diameter) {
    const auto dr = diameter(*open_graph, stats.c1_vertices);
    stats.diameter = dr.value;
    stats.diameter_exact = dr.exact;
  }
  if (with_mixing && stats.c1_size <= kMixingSizeCap) stats.mixing_time = mixing_time_tv(*open_graph, stats.c1_vertices);
  return stats;
}

namespace {

struct Cell {
  std::size_t instance;
  std::size_t param_index;
  double param;
  double p;
};

std::vector<TrialRecord> run_sweep(const ExperimentConfig& cfg, const std::vector<GraphInstance>& insts,
                                   const std::vector<Cell>& cells, const std::string& param_name) {
  std::vector<std::optional<Graph>> graphs(insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i)
    if (!insts[i].implicit_complete()) graphs[i] = insts[i].build();

  std::vector<TrialRecord> rows(cells.size() * cfg.trials);
  parallel_for(rows.size(), cfg.threads, [&](std::size_t idx) {
    const Cell& c = cells[idx / cfg.trials];
    const std::size_t trial = idx % cfg.trials;
    const GraphInstance& inst = insts[c.instance];
    TrialRecord rec;
    rec.graph = inst.label;
    rec.n = inst.n;
    rec.d = graphs[c.instance] ? graphs[c.instance]->regular_degree().value_or(inst.d) : inst.d;
    rec.p = c.p;
    rec.param_name = param_name;
    rec.param = c.param;
    rec.trial = trial;
    rec.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(cfg.kind), c.instance, c.param_index, trial});
    const auto start = std::chrono::steady_clock::now();
    const auto st = percolate_instance(inst, graphs[c.instance] ? &*graphs[c.instance] : nullptr, c.p, rec.seed,
                                       cfg.with_diameter, cfg.with_mixing);
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const double n = static_cast<double>(inst.n);
    rec.c1 = st.c1_size;
    rec.c1_scaled = static_cast<double>(st.c1_size) * std::pow(n, -2.0 / 3.0);
    if (st.diameter) {
      rec.diam = *st.diameter;
      rec.diam_scaled = static_cast<double>(*st.diameter) * std::pow(n, -1.0 / 3.0);
      rec.diam_exact = st.diameter_exact;
    }
    if (st.mixing_time) {
      rec.mix = *st.mixing_time;
      rec.mix_scaled = static_cast<double>(*st.mixing_time) / n;
    }
    if (param_name == "eps") {
      const double eps = c.param;
      rec.c1_over_2eps_n = static_cast<double>(st.c1_size) / (2.0 * eps * n);
      const double lx = std::log(n * eps * eps * eps);
      rec.threshold_hit = static_cast<double>(st.c1_size) >= cfg.delta * eps * n / (lx * lx * lx);
    }
    rows[idx] = std::move(rec);
  });
  return rows;
}

}  // namespace

TrialTable run_window_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto insts = cfg.family.instances();
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < insts.size(); ++i)
    for (std::size_t l = 0; l < cfg.lambdas.size(); ++l)
      cells.push_back({i, l, cfg.lambdas[l], window_p(insts[i].n, insts[i].d, cfg.lambdas[l])});
  TrialTable table;
  table.rows = run_sweep(cfg, insts, cells, "lambda");
  table.assertions = evaluate_assertions(table.rows, cfg.assertions);
  return table;
}

TrialTable run_supercritical_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.eps_rule) throw Error(ErrorKind::invalid_parameter, "supercritical sweep needs an eps rule");
  const auto insts = cfg.family.instances();
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const double eps = (*cfg.eps_rule)(insts[i].n);
    // The threshold needs ln(n eps^3) > 0; the window radius itself is not
    // used here and is often below 1 at desk-scale n.
    const double x = static_cast<double>(insts[i].n) * eps * eps * eps;
    if (!(eps > 0.0 && eps < 0.5) || !(x > std::exp(1.0)))
      throw Error(ErrorKind::out_of_regime, "supercritical sweep needs eps in (0, 1/2) and n eps^3 > e, got " +
                                                std::to_string(x));
    if (insts[i].d < 2) throw Error(ErrorKind::invalid_parameter, "degree must be >= 2");
    const double p = (1.0 + eps) / static_cast<double>(insts[i].d - 1);
    if (p > 1.0) throw Error(ErrorKind::invalid_parameter, "p = " + std::to_string(p) + " exceeds 1");
    cells.push_back({i, 0, eps, p});
  }
  TrialTable table;
  table.rows = run_sweep(cfg, insts, cells, "eps");
  table.assertions = evaluate_assertions(table.rows, cfg.assertions);
  return table;
}

ConditionTable run_condition_tables(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto insts = cfg.family.instances();
  ConditionTable table;
  table.rows.resize(insts.size());
  parallel_for(insts.size(), cfg.threads, [&](std::size_t i) {
    const Graph g = insts[i].build();
    ConditionRow row;
    row.graph = insts[i].label;
    row.n = g.num_vertices();
    const auto d = g.regular_degree();
    if (!d) throw Error(ErrorKind::invalid_structure, insts[i].label + " is not regular");
    if (*d < 3) throw Error(ErrorKind::out_of_model, insts[i].label + " has degree < 3");
    row.d = *d;
    row.girth = girth(g);
    if (cfg.with_spectrum) row.lambda_star = spectral_expansion(g);
    std::size_t horizon = std::max<std::size_t>(1, integer_cube_root(row.n));
    if (cfg.eps_rule) {
      row.eps = (*cfg.eps_rule)(row.n);
      try {
        row.r = window_radius(row.n, *row.eps);
        horizon = std::max(horizon, 2 * *row.r);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::out_of_regime) throw;
      }
    }
    const auto profile = average_return_probabilities(g, horizon);
    row.averaged_over_vertices = !g.vertex_transitive();
    row.s1 = condition1_statistic(profile, row.n);
    if (row.r) row.s2 = condition2_statistic(profile, *row.eps, *row.r);
    if (row.girth) row.girth_lhs = girth_condition_lhs(row.d, *row.girth, row.n);
    table.rows[i] = row;
  });
  table.assertions = evaluate_assertions(table.rows, cfg.assertions);
  return table;
}

CouplingCheckRow run_coupling_check(const Graph& g, const std::string& label, Vertex v, double p, std::size_t r,
                                    std::size_t a_size, std::size_t trials, std::uint64_t seed, std::size_t threads) {
  if (a_size + 1 > g.num_vertices()) throw Error(ErrorKind::invalid_parameter, "forbidden set too large");
  const CouplingSampler sampler(g, v, r);
  std::vector<std::uint8_t> ok(trials, 0), strict(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng rng = make_rng(derive_seed(seed, {t}));
    std::vector<Vertex> forbidden;
    std::vector<std::uint8_t> taken(g.num_vertices(), 0);
    taken[v] = 1;
    while (forbidden.size() < a_size) {
      const auto x = static_cast<Vertex>(uniform_below(rng, g.num_vertices()));
      if (taken[x]) continue;
      taken[x] = 1;
      forbidden.push_back(x);
    }
    const auto js = sampler.sample(p, forbidden, rng);
    ok[t] = check_coupling_inequality(js);
    strict[t] = strict_lower_witness(js);
  });
  CouplingCheckRow row;
  row.graph = label;
  row.p = p;
  row.r = r;
  row.a_size = a_size;
  row.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    row.violations += !ok[t];
    row.strict_witnesses += strict[t];
  }
  return row;
}

std::vector<CouplingCheckRow> run_coupling_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<CouplingCheckRow> rows;
  const auto insts = cfg.family.instances();
  const std::vector<std::size_t> radii = cfg.radii.empty() ? std::vector<std::size_t>{cfg.r} : cfg.radii;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const Graph g = insts[i].build();
    for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi)
      for (std::size_t r : radii)
        for (std::size_t a : cfg.a_sizes)
          rows.push_back(run_coupling_check(g, insts[i].label, 0, cfg.p_values[pi], r, a, cfg.trials,
                                            derive_seed(cfg.seed, {i, pi, r, a}), cfg.threads));
  }
  return rows;
}

std::vector<TreeLemmaReport> run_tree_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TreeLemmaReport> rows;
  for (std::size_t d : cfg.tree_d)
    for (std::size_t e = 0; e < cfg.eps_values.size(); ++e)
      for (std::size_t r : cfg.radii) {
        Rng rng = make_rng(derive_seed(cfg.seed, {d, e, r}));
        rows.push_back(lemma7_checks(d, cfg.eps_values[e], r, cfg.mc_trials, &rng));
        rows.push_back(lemma8_checks(d, cfg.eps_values[e], r, cfg.mc_trials, &rng));
      }
  return rows;
}

// Summaries and assertions ------------------------------------------------------

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::invalid_parameter, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

using CellKey = std::pair<std::size_t, double>;

std::map<CellKey, std::vector<double>> cells_of(const std::vector<TrialRecord>& rows, const std::string& column,
                                                std::optional<std::size_t> only_n) {
  std::map<CellKey, std::vector<double>> cells;
  for (const auto& r : rows) {
    if (only_n && r.n != *only_n) continue;
    auto& bucket = cells[{r.n, r.param}];
    if (const auto v = r.value(column)) bucket.push_back(*v);
  }
  return cells;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string cell_name(const CellKey& k) { return "n=" + std::to_string(k.first) + " param=" + fmt(k.second); }

}  // namespace

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& rows, const std::string& column) {
  std::vector<CellSummary> out;
  for (const auto& [key, vals] : cells_of(rows, column, std::nullopt)) {
    if (vals.empty()) continue;
    CellSummary s;
    s.n = key.first;
    s.param = key.second;
    s.column = column;
    s.count = vals.size();
    s.q10 = quantile(vals, 0.1);
    s.median = quantile(vals, 0.5);
    s.q90 = quantile(vals, 0.9);
    double sum = 0.0;
    for (double v : vals) sum += v;
    s.mean = sum / static_cast<double>(vals.size());
    out.push_back(s);
  }
  return out;
}

std::vector<AssertionResult> evaluate_assertions(const std::vector<TrialRecord>& rows,
                                                 const std::vector<Assertion>& assertions) {
  std::vector<AssertionResult> out;
  for (const auto& a : assertions) {
    AssertionResult res;
    res.description = a.type + "(" + a.column + ")";
    res.passed = true;
    const auto cells = cells_of(rows, a.column, a.only_n);
    std::ostringstream detail;
    if (cells.empty()) {
      res.passed = false;
      detail << "no rows";
    }
    if (a.type == "median_in_band") {
      res.description += " in [" + fmt(a.lo) + ", " + fmt(a.hi) + "]";
      for (const auto& [key, vals] : cells) {
        const bool ok = !vals.empty() && quantile(vals, 0.5) >= a.lo && quantile(vals, 0.5) <= a.hi;
        detail << cell_name(key) << " median=" << (vals.empty() ? std::nan("") : quantile(vals, 0.5)) << "; ";
        res.passed = res.passed && ok;
      }
    } else if (a.type == "median_increasing") {
      std::map<std::size_t, std::vector<std::pair<double, double>>> by_n;
      for (const auto& [key, vals] : cells) {
        if (vals.empty()) {
          res.passed = false;
          continue;
        }
        by_n[key.first].emplace_back(key.second, quantile(vals, 0.5));
      }
      for (auto& [n, seq] : by_n) {
        std::sort(seq.begin(), seq.end());
        for (std::size_t i = 0; i < seq.size(); ++i) {
          detail << "n=" << n << " param=" << fmt(seq[i].first) << " median=" << fmt(seq[i].second) << "; ";
          if (i > 0 && !(seq[i].second > seq[i - 1].second)) res.passed = false;
        }
      }
    } else if (a.type == "rate_at_least") {
      res.description += " fraction in [" + fmt(a.lo) + ", " + fmt(a.hi) + "] >= " + fmt(a.rate);
      for (const auto& [key, vals] : cells) {
        std::size_t hit = 0;
        for (double v : vals) hit += v >= a.lo && v <= a.hi;
        const double frac = vals.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(vals.size());
        detail << cell_name(key) << " fraction=" << fmt(frac) << "; ";
        res.passed = res.passed && frac >= a.rate;
      }
    } else {
      res.passed = false;
      detail << "assertion type not applicable to trial tables";
    }
    if (a.only_n) res.description += " at n=" + std::to_string(*a.only_n);
    res.detail = detail.str();
    out.push_back(res);
  }
  return out;
}

namespace {

std::optional<double> condition_value(const ConditionRow& r, const std::string& column) {
  if (column == "n") return static_cast<double>(r.n);
  if (column == "d") return static_cast<double>(r.d);
  if (column == "s1") return r.s1;
  if (column == "s2") return r.s2;
  if (column == "girth") return r.girth ? std::optional<double>(static_cast<double>(*r.girth)) : std::nullopt;
  if (column == "lambda_star") return r.lambda_star;
  if (column == "girth_lhs") return r.girth_lhs;
  if (column == "eps") return r.eps;
  throw Error(ErrorKind::invalid_parameter, "unknown column '" + column + "'");
}

}  // namespace

std::vector<AssertionResult> evaluate_assertions(const std::vector<ConditionRow>& rows,
                                                 const std::vector<Assertion>& assertions) {
  std::vector<AssertionResult> out;
  for (const auto& a : assertions) {
    AssertionResult res;
    res.description = a.type + "(" + a.column + ")";
    res.passed = !rows.empty();
    std::ostringstream detail;
    std::vector<std::pair<std::size_t, double>> seq;
    for (const auto& r : rows) {
      if (a.only_n && r.n != *a.only_n) continue;
      const auto v = condition_value(r, a.column);
      if (!v) {
        res.passed = false;
        detail << r.graph << " missing; ";
        continue;
      }
      seq.emplace_back(r.n, *v);
      detail << r.graph << "=" << fmt(*v) << "; ";
    }
    std::sort(seq.begin(), seq.end());
    if (a.type == "in_band") {
      res.description += " in [" + fmt(a.lo) + ", " + fmt(a.hi) + "]";
      for (const auto& [n, v] : seq) res.passed = res.passed && v >= a.lo && v <= a.hi;
    } else if (a.type == "max_ratio") {
      if (!a.reference_n) throw Error(ErrorKind::invalid_parameter, "max_ratio needs reference_n");
      res.description += " / value at n=" + std::to_string(*a.reference_n) + " <= " + fmt(a.hi);
      auto ref = std::find_if(seq.begin(), seq.end(), [&](const auto& s) { return s.first == *a.reference_n; });
      if (ref == seq.end() || ref->second <= 0.0) {
        res.passed = false;
        detail << "reference value unavailable";
      } else {
        for (const auto& [n, v] : seq) res.passed = res.passed && v / ref->second <= a.hi;
      }
    } else if (a.type == "strictly_decreasing" || a.type == "strictly_increasing") {
      const bool dec = a.type == "strictly_decreasing";
      for (std::size_t i = 1; i < seq.size(); ++i)
        res.passed = res.passed && (dec ? seq[i].second < seq[i - 1].second : seq[i].second > seq[i - 1].second);
    } else {
      res.passed = false;
      detail << "assertion type not applicable to condition tables";
    }
    res.detail = detail.str();
    out.push_back(res);
  }
  return out;
}

// Output -------------------------------------------------------------------

namespace {

template <class T>
std::string cell(const std::optional<T>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(10) << *v;
  return os.str();
}

std::string cell(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& rows, bool with_runtime) {
  auto cols = TrialRecord::columns();
  if (!with_runtime) cols.pop_back();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.graph << ',' << r.n << ',' << r.d << ',' << cell(r.p) << ',' << r.param_name << ',' << cell(r.param)
        << ',' << r.trial << ',' << r.seed << ',' << r.c1 << ',' << cell(r.c1_scaled) << ','
        << cell(r.c1_over_2eps_n) << ',' << (r.threshold_hit ? (*r.threshold_hit ? "1" : "0") : "") << ','
        << cell(r.diam) << ',' << cell(r.diam_scaled) << ','
        << (r.diam_exact ? (*r.diam_exact ? "1" : "0") : "") << ',' << cell(r.mix) << ',' << cell(r.mix_scaled);
    if (with_runtime) out << ',' << cell(r.runtime_ms);
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "n,param,column,count,q10,median,q90,mean\n";
  for (const auto& c : cells)
    out << c.n << ',' << cell(c.param) << ',' << c.column << ',' << c.count << ',' << cell(c.q10) << ','
        << cell(c.median) << ',' << cell(c.q90) << ',' << cell(c.mean) << '\n';
}

void write_conditions_csv(std::ostream& out, const std::vector<ConditionRow>& rows) {
  out << "graph,n,d,girth,lambda_star,S1,eps,r,S2,girth_lhs,averaged\n";
  for (const auto& r : rows)
    out << r.graph << ',' << r.n << ',' << r.d << ',' << cell(r.girth) << ',' << cell(r.lambda_star) << ','
        << cell(r.s1) << ',' << cell(r.eps) << ',' << cell(r.r) << ',' << cell(r.s2) << ',' << cell(r.girth_lhs)
        << ',' << (r.averaged_over_vertices ? 1 : 0) << '\n';
}

void write_coupling_csv(std::ostream& out, const std::vector<CouplingCheckRow>& rows) {
  out << "graph,p,r,a_size,trials,violations,strict_witnesses\n";
  for (const auto& r : rows)
    out << r.graph << ',' << cell(r.p) << ',' << r.r << ',' << r.a_size << ',' << r.trials << ',' << r.violations
        << ',' << r.strict_witnesses << '\n';
}

void write_tree_csv(std::ostream& out, const std::vector<TreeLemmaReport>& rows) {
  out << "d,eps,sign,r,p,survival,lower_bound,upper_bound,lower_holds,upper_holds,lyons_lower,lyons_upper,"
         "second_moment_ratio,conditional_moment,conditional_moment_ratio,mc_conditional_moment,"
         "mc_conditional_moment_ratio,mc_conditioned\n";
  for (const auto& r : rows)
    out << r.d << ',' << cell(r.eps) << ',' << r.sign << ',' << r.r << ',' << cell(r.p) << ',' << cell(r.survival)
        << ',' << cell(r.lower_bound) << ',' << cell(r.upper_bound) << ',' << r.lower_holds << ',' << r.upper_holds
        << ',' << cell(r.lyons.lower) << ',' << cell(r.lyons.upper) << ',' << cell(r.second_moment_ratio) << ','
        << cell(r.conditional_moment) << ',' << cell(r.conditional_moment_ratio) << ','
        << cell(r.mc_conditional_moment) << ',' << cell(r.mc_conditional_moment_ratio) << ',' << r.mc_conditioned
        << '\n';
}

const char* build_version() noexcept { return MFPERC_GIT_DESCRIBE; }

std::string run_manifest_json(const ExperimentConfig& cfg, double wall_seconds,
                              const std::vector<AssertionResult>& assertions) {
  Json j;
  j["config"] = Json::parse(cfg.to_json_text());
  j["seed"] = cfg.seed;
  j["version"] = build_version();
  j["wall_seconds"] = wall_seconds;
  Json as = Json::array();
  for (const auto& a : assertions) as.push_back({{"assertion", a.description}, {"passed", a.passed}, {"detail", a.detail}});
  j["assertions"] = as;
  return j.dump(2);
}

std::string output_directory(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("MFPERC_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

}  // namespace mfperc
