// spanprog: detections, simulations, and verification suites on graph files.
//
// spanprog detect   <problem> <graph-file> [options]
// spanprog simulate <problem> <graph-file> [options]   (adds --c1/--c2)
// spanprog verify   <suite> [options]
//
// Reports are JSON (schema "spanprog-report/1"), byte-stable for fixed
// inputs and seed; timings are included only with --timings so the default
// output stays reproducible.  Exit codes: 0 = decision produced, 2 =
// violation detected (verify suites, or --verify cross-checks), 1 = usage
// or input error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spanprog/graph.hpp"
#include "spanprog/oracles.hpp"
#include "spanprog/span_program.hpp"
#include "spanprog/constructors.hpp"
#include "spanprog/walk.hpp"

using nlohmann::ordered_json;
using namespace spanprog;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << h;
  return out.str();
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  if (out.empty()) throw std::runtime_error("empty integer list");
  return out;
}

struct Options {
  std::string problem;
  std::string graph_path;
  std::string coloring_path;
  std::string json_path;
  uint64_t seed = 0;
  int trials = 0;  // 0 = use the problem's default
  double tolerance = 1e-8;
  double c1 = 1.0, c2 = 10.0;
  int s = 0, t = -1;               // stconn
  int k = 2;                       // path length / two-leg-star path
  int l = 2, d = 1;                // two-leg-star hub position / short legs
  std::string legs = "1";          // star leg lengths
  std::vector<std::string> components;  // star-forest
  std::vector<int> hash_family;    // {k, m}: independence, log2 domain
  bool verify = false;
  bool timings = false;
  bool simulate = false;
};

// One span program + assignment to decide; a trial may carry several
// (star-forest needs every component to accept).
struct TrialUnit {
  SpanProgram program;
  Assignment x;
  EvaluatorConfig cfg;
};

int num_labels_for(const Options& opt, const SimpleGraph&) {
  if (opt.problem == "path") return opt.k + 1;
  if (opt.problem == "star")
    return StarPattern(parse_int_list(opt.legs)).num_vertices();
  if (opt.problem == "triangle") return 3;
  if (opt.problem == "two-leg-star")
    return TwoLegStarPattern(opt.k, opt.l, opt.d).num_vertices();
  if (opt.problem == "star-forest") {
    int total = 0;
    for (const auto& c : opt.components)
      total += StarPattern(parse_int_list(c)).num_vertices();
    return total;
  }
  return 0;  // stconn: no coloring
}

int default_trials(const Options& opt, const SimpleGraph& g) {
  double p = 1.0;
  if (opt.problem == "stconn") return 1;
  if (!opt.coloring_path.empty()) return 1;  // fixed coloring: deterministic
  if (opt.problem == "path")
    p = 2.0 * std::pow(opt.k + 1.0, -(opt.k + 1.0));
  else if (opt.problem == "triangle")
    p = 2.0 / 9.0;
  else {
    double labels = num_labels_for(opt, g);
    p = std::pow(labels, -labels);
  }
  double t = std::ceil(3.0 / p);
  if (t > 5e7) throw std::runtime_error("default trial count too large; pass --trials");
  return static_cast<int>(t);
}

Coloring trial_coloring(const Options& opt, const SimpleGraph& g,
                        int labels, uint64_t tseed,
                        const std::optional<Coloring>& fixed) {
  if (fixed) return *fixed;
  if (!opt.hash_family.empty()) {
    int indep = opt.hash_family[0], log_n = opt.hash_family[1];
    if ((1 << log_n) < g.num_vertices())
      throw std::runtime_error("--hash-family domain smaller than the graph");
    int log_l = 0;
    while ((1 << log_l) < labels) ++log_l;
    if (log_l > log_n)
      throw std::runtime_error("--hash-family domain smaller than label set");
    KWiseHash h = KWiseHash::sample(log_n, log_l, indep, tseed);
    Coloring c;
    c.num_labels = labels;
    for (int v = 0; v < g.num_vertices(); ++v)
      c.assign.push_back(static_cast<int>(
          khash_eval(h, static_cast<uint32_t>(v)) % labels));
    return c;
  }
  return random_coloring(g, labels, tseed);
}

std::vector<TrialUnit> build_trial(const Options& opt, const SimpleGraph& g,
                                   const Coloring& c) {
  std::vector<TrialUnit> units;
  if (opt.problem == "stconn") {
    int t = opt.t < 0 ? g.num_vertices() - 1 : opt.t;
    auto inst = stconn_program(g.num_vertices(), opt.s, t);
    units.push_back({inst.program, edge_assignment(g),
                     stconn_config(g.num_vertices())});
  } else if (opt.problem == "path") {
    auto inst = path_instance(g, opt.k, c);
    units.push_back({inst.stconn.program, inst.x,
                     stconn_config(g.num_vertices() + 2)});
  } else if (opt.problem == "star") {
    auto inst = star_program(StarPattern(parse_int_list(opt.legs)), c, g);
    units.push_back({inst.program, edge_assignment(g), star_config(inst)});
  } else if (opt.problem == "star-forest") {
    std::vector<StarPattern> pats;
    for (const auto& comp : opt.components)
      pats.emplace_back(parse_int_list(comp));
    for (auto& piece : star_forest_split(pats, g, c))
      units.push_back({piece.instance.program, edge_assignment(piece.sub),
                       star_config(piece.instance)});
  } else if (opt.problem == "triangle") {
    auto inst = triangle_program(c, g);
    units.push_back({inst.program, edge_assignment(g), triangle_config(inst)});
  } else if (opt.problem == "two-leg-star") {
    auto inst = two_leg_star_instance(TwoLegStarPattern(opt.k, opt.l, opt.d),
                                      c, g);
    EvaluatorConfig cfg;
    // any realized s-t path visits each H vertex at most once; negative
    // witness coefficients are 0/1 component indicators
    cfg.w1_bound = inst.h_vertices;
    cfg.w0_bound = 4.0 * static_cast<double>(inst.program.inputs.size() +
                                             inst.program.free_vectors.size());
    units.push_back({inst.program, edge_assignment(g), cfg});
  } else {
    throw std::runtime_error("unknown problem: " + opt.problem);
  }
  return units;
}

// One-sided oracle cross-check: an accept must be certified by the matching
// combinatorial structure (the constructions never accept falsely under
// their promises).
ordered_json oracle_check(const Options& opt, const SimpleGraph& g,
                          bool decision, bool& violation) {
  ordered_json out;
  bool certified = false;
  if (opt.problem == "stconn") {
    int t = opt.t < 0 ? g.num_vertices() - 1 : opt.t;
    certified = is_connected(g, opt.s, t);
    out["connected"] = certified;
    violation = decision != certified;  // stconn is two-sided exact
  } else {
    if (opt.problem == "path")
      certified = contains_subgraph(g, path_graph(opt.k));
    else if (opt.problem == "triangle")
      certified = contains_subgraph(g, triangle_graph());
    else if (opt.problem == "star")
      certified = contains_minor(g, StarPattern(parse_int_list(opt.legs)).graph());
    else if (opt.problem == "two-leg-star")
      certified = contains_subgraph(g, TwoLegStarPattern(opt.k, opt.l, opt.d).graph());
    else if (opt.problem == "star-forest") {
      // disjoint union of the component patterns as a single minor test
      std::vector<Edge> edges;
      int base = 0;
      for (const auto& comp : opt.components) {
        SimpleGraph pg = StarPattern(parse_int_list(comp)).graph();
        for (const auto& [u, v] : pg.edges())
          edges.emplace_back(base + u, base + v);
        base += pg.num_vertices();
      }
      certified = contains_minor(g, SimpleGraph(base, edges));
    }
    out["structure_present"] = certified;
    violation = decision && !certified;
  }
  out["violation"] = violation;
  return out;
}

int run_detection(const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  std::string raw = read_file(opt.graph_path);
  SimpleGraph g = parse_edge_list(raw);
  int labels = num_labels_for(opt, g);

  std::optional<Coloring> fixed;
  if (!opt.coloring_path.empty()) {
    if (labels == 0)
      throw std::runtime_error("--coloring does not apply to stconn");
    std::istringstream in(read_file(opt.coloring_path));
    fixed = parse_coloring(in, labels);
    if (fixed->assign.size() != static_cast<size_t>(g.num_vertices()))
      throw std::runtime_error("coloring file does not cover the graph");
  }

  int trials = opt.trials > 0 ? opt.trials : default_trials(opt, g);

  ordered_json rep;
  rep["schema"] = "spanprog-report/1";
  rep["command"] = opt.simulate ? "simulate" : "detect";
  rep["problem"] = opt.problem;
  rep["input"] = {{"path", opt.graph_path}, {"digest", fnv1a_hex(raw)}};
  ordered_json params;
  if (opt.problem == "stconn") {
    params["s"] = opt.s;
    params["t"] = opt.t < 0 ? g.num_vertices() - 1 : opt.t;
  } else if (opt.problem == "path") {
    params["k"] = opt.k;
  } else if (opt.problem == "star") {
    params["legs"] = parse_int_list(opt.legs);
  } else if (opt.problem == "star-forest") {
    ordered_json comps = ordered_json::array();
    for (const auto& c : opt.components) comps.push_back(parse_int_list(c));
    params["components"] = comps;
  } else if (opt.problem == "two-leg-star") {
    params["k"] = opt.k;
    params["l"] = opt.l;
    params["d"] = opt.d;
  }
  if (opt.simulate) {
    params["c1"] = opt.c1;
    params["c2"] = opt.c2;
  }
  rep["params"] = params;
  rep["seed"] = opt.seed;
  rep["trials_requested"] = trials;
  rep["combination"] = "or";

  bool decision = false;
  ordered_json trial_arr = ordered_json::array();
  std::vector<TrialUnit> decisive;  // accepting trial, else the last trial
  int ran = 0;
  for (int trial = 0; trial < trials && !decision; ++trial) {
    uint64_t tseed = detail::mix_seed(opt.seed, static_cast<uint64_t>(trial));
    Coloring c;
    if (labels > 0) c = trial_coloring(opt, g, labels, tseed, fixed);
    std::vector<TrialUnit> units = build_trial(opt, g, c);
    bool all = true;
    ordered_json tj;
    tj["seed"] = tseed;
    if (opt.simulate) {
      std::vector<double> masses;
      double theta = 0.0;
      for (auto& u : units) {
        EvaluatorConfig cfg = u.cfg;
        cfg.c1 = opt.c1;
        cfg.c2 = opt.c2;
        SpanProgram cp = canonicalize_free(u.program);
        EvaluatorResult res = run_evaluator(cp, extend_assignment(u.x), cfg);
        masses.push_back(res.mass);
        theta = res.theta;
        all = all && res.accept;
      }
      tj["masses"] = masses;
      tj["theta"] = theta;
    } else {
      for (auto& u : units) all = all && evaluate(u.program, u.x);
    }
    tj["accept"] = all;
    trial_arr.push_back(tj);
    decisive = std::move(units);
    decision = all;
    ++ran;
  }
  rep["trials_run"] = ran;
  rep["trials"] = trial_arr;
  rep["decision"] = decision ? 1 : 0;

  // witness sizes on the decisive trial: positive when accepted, negative
  // when every trial rejected
  ordered_json ws;
  std::vector<double> sizes;
  bool have = !decisive.empty();
  for (auto& u : decisive) {
    if (decision) {
      auto w = positive_witness(u.program, u.x);
      if (!w) { have = false; break; }
      sizes.push_back(w->size);
    } else {
      auto w = negative_witness(u.program, u.x);
      if (!w) continue;  // accepted component of a rejected forest trial
      sizes.push_back(w->size);
    }
  }
  if (have) {
    ws["kind"] = decision ? "positive" : "negative";
    ws["sizes"] = sizes;
    rep["witness_sizes"] = ws;
  } else {
    rep["witness_sizes"] = nullptr;
  }

  bool violation = false;
  if (opt.verify) rep["oracle"] = oracle_check(opt, g, decision, violation);

  if (opt.timings) {
    auto t1 = std::chrono::steady_clock::now();
    rep["timings"] = {
        {"total_ms",
         std::chrono::duration<double, std::milli>(t1 - t0).count()}};
  }

  std::cout << rep.dump(2) << '\n';
  if (!opt.json_path.empty()) {
    std::ofstream out(opt.json_path);
    if (!out) throw std::runtime_error("cannot write " + opt.json_path);
    out << rep.dump(2) << '\n';
  }
  return violation ? 2 : 0;
}

// -------------------------------------------------------------------------
// Verification suites.
// -------------------------------------------------------------------------

struct VerifyInstances {
  std::vector<std::string> names;
  std::vector<LayeredProgram> programs;
};

VerifyInstances family_instances() {
  VerifyInstances out;
  auto st = stconn_program(4, 0, 3);
  out.names.push_back("stconn");
  out.programs.push_back(layered_stconn(st, stconn_config(4).alpha()));

  StarPattern pat({1, 3, 1});
  Coloring sc;
  sc.num_labels = pat.num_vertices();
  for (int v = 0; v < pat.num_vertices(); ++v) sc.assign.push_back(v);
  auto si = star_program(pat, sc, pat.graph());
  out.names.push_back("star");
  out.programs.push_back(layered_star(si, star_config(si).alpha()));

  Coloring tc{3, {0, 1, 2}};
  auto ti = triangle_program(tc, triangle_graph());
  out.names.push_back("triangle");
  out.programs.push_back(layered_triangle(ti, triangle_config(ti).alpha()));
  return out;
}

SimpleGraph random_graph(std::mt19937_64& rng, int n, int p256) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (detail::uniform_below(rng, 256) < static_cast<uint64_t>(p256))
        edges.emplace_back(u, v);
  return SimpleGraph(n, edges);
}

int run_verify(const std::string& suite, const Options& opt) {
  ordered_json rep;
  rep["schema"] = "spanprog-report/1";
  rep["command"] = "verify";
  rep["suite"] = suite;
  rep["seed"] = opt.seed;
  bool ok = true;

  if (suite == "spectral") {
    std::mt19937_64 rng(detail::mix_seed(opt.seed, 0x5bec));
    double worst = 0.0;
    int failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
      int dim = 4 + static_cast<int>(detail::uniform_below(rng, 21));
      int ac = 1 + static_cast<int>(detail::uniform_below(rng, dim - 1));
      int bc = 1 + static_cast<int>(detail::uniform_below(rng, dim - 1));
      auto rs = random_reflection_system(dim, ac, bc, rng());
      auto [pd, sr] = spectral_decompose_product(rs);
      (void)pd;
      worst = std::max(worst, sr.max_phase_mismatch);
      if (!sr.ok) ++failures;
    }
    rep["systems"] = 200;
    rep["failures"] = failures;
    rep["max_phase_mismatch"] = worst;
    ok = failures == 0;
  } else if (suite == "gap") {
    auto inst = family_instances();
    ordered_json fams = ordered_json::array();
    for (size_t i = 0; i < inst.programs.size(); ++i) {
      const auto& lp = inst.programs[i];
      double gap = delta_gap(lp.spec);
      bool stable = gap > 0;
      auto ref = block_spectrum(lp.spec, 2).reduced;
      for (int n : {2, 4, 8}) {
        auto bs = block_spectrum(lp.spec, n);
        if (bs.direct.size() != ref.size()) stable = false;
        for (size_t j = 0; stable && j < ref.size(); ++j)
          if (std::abs(bs.direct[j] - ref[j]) > opt.tolerance) stable = false;
      }
      fams.push_back({{"family", inst.names[i]},
                      {"delta_gap", gap},
                      {"n_independent", stable}});
      ok = ok && stable;
    }
    rep["families"] = fams;
    std::mt19937_64 rng(detail::mix_seed(opt.seed, 0x6a9));
    double worst_excess = -1.0;
    for (int trial = 0; trial < 100; ++trial) {
      auto rs = random_reflection_system(16, 5, 6, rng());
      for (double theta : {0.1, 0.5}) {
        double ratio = effective_gap_check(rs, theta, 5, rng());
        worst_excess = std::max(worst_excess, ratio - theta / 2.0);
        if (ratio > theta / 2.0 + 1e-9) ok = false;
      }
    }
    rep["gap_sweep_systems"] = 100;
    rep["worst_ratio_minus_bound"] = worst_excess;
  } else if (suite == "factorization") {
    auto inst = family_instances();
    ordered_json fams = ordered_json::array();
    for (size_t i = 0; i < inst.programs.size(); ++i) {
      auto rs = layered_reflections(inst.programs[i]);
      auto fc = factorization_identity_check(rs, inst.programs[i]);
      fams.push_back({{"family", inst.names[i]},
                      {"max_residual", fc.max_residual},
                      {"nullity", fc.nullity_v},
                      {"ok", fc.ok}});
      ok = ok && fc.ok;
    }
    rep["families"] = fams;
  } else if (suite == "k5") {
    auto k5 = k5_counterexample_check();
    rep["k5_minor_absent"] = k5.k5_minor_absent;
    rep["edges_double_lifted"] = k5.edges_double_lifted;
    rep["product_vertices"] = k5.product.num_vertices();
    rep["product_edges"] = k5.product.num_edges();
    ok = k5.k5_minor_absent && k5.edges_double_lifted;
  } else if (suite == "oracles") {
    // span evaluation vs BFS, exhaustively on 4 vertices
    int mismatches = 0;
    for (int mask = 0; mask < (1 << pair_count(4)); ++mask) {
      std::vector<Edge> edges;
      for (int u = 0; u < 4; ++u)
        for (int v = u + 1; v < 4; ++v)
          if (mask >> pair_index(4, u, v) & 1) edges.emplace_back(u, v);
      SimpleGraph g(4, edges);
      for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t) {
          if (s == t) continue;
          auto instp = stconn_program(4, s, t);
          if (evaluate(instp.program, edge_assignment(g)) !=
              is_connected(g, s, t))
            ++mismatches;
        }
    }
    rep["stconn_exhaustive_mismatches"] = mismatches;
    ok = ok && mismatches == 0;
    // witness size vs effective resistance on random connected graphs
    std::mt19937_64 rng(detail::mix_seed(opt.seed, 0x04ac1e));
    double worst = 0.0;
    int checked = 0;
    while (checked < 50) {
      int n = 3 + static_cast<int>(detail::uniform_below(rng, 6));
      SimpleGraph g = random_graph(rng, n, 150);
      if (!is_connected(g, 0, n - 1)) continue;
      auto er = effective_resistance(g, 0, n - 1);
      auto instp = stconn_program(n, 0, n - 1);
      auto w = positive_witness(instp.program, edge_assignment(g));
      if (!er || !w) { ok = false; break; }
      worst = std::max(worst, std::abs(w->size - *er));
      ++checked;
    }
    rep["resistance_checks"] = checked;
    rep["max_resistance_error"] = worst;
    ok = ok && worst <= 1e-6;
  } else {
    throw std::runtime_error("unknown suite: " + suite);
  }

  rep["ok"] = ok;
  std::cout << rep.dump(2) << '\n';
  if (!opt.json_path.empty()) {
    std::ofstream out(opt.json_path);
    if (!out) throw std::runtime_error("cannot write " + opt.json_path);
    out << rep.dump(2) << '\n';
  }
  return ok ? 0 : 2;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("problem", opt.problem, "problem family")
      ->required()
      ->check(CLI::IsMember({"stconn", "path", "star", "star-forest",
                             "triangle", "two-leg-star"}));
  cmd->add_option("graph", opt.graph_path, "edge-list file")->required();
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--trials", opt.trials, "number of trials (0 = default)");
  cmd->add_option("--tolerance", opt.tolerance, "numeric comparison slack");
  cmd->add_option("--s", opt.s, "source vertex (stconn)");
  cmd->add_option("--t", opt.t, "target vertex (stconn; default n-1)");
  cmd->add_option("--k", opt.k, "path length / two-leg-star path vertices");
  cmd->add_option("--l", opt.l, "two-leg-star hub position");
  cmd->add_option("--d", opt.d, "two-leg-star short-leg count");
  cmd->add_option("--legs", opt.legs, "star leg lengths, e.g. 1,3,1");
  cmd->add_option("--component", opt.components,
                  "star-forest component legs (repeatable)");
  cmd->add_option("--coloring", opt.coloring_path,
                  "fixed coloring file (one label per line)");
  cmd->add_option("--hash-family", opt.hash_family,
                  "k-wise hash colorings: independence k, domain log2 m")
      ->expected(2);
  cmd->add_flag("--verify", opt.verify, "cross-check with brute-force oracles");
  cmd->add_flag("--timings", opt.timings, "include wall-clock timings");
  cmd->add_option("--json", opt.json_path, "also write the report to PATH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"span-program graph property detection"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* det = app.add_subcommand("detect", "decide via span program evaluation");
  add_common(det, opt);

  CLI::App* sim = app.add_subcommand(
      "simulate", "decide via the two-reflection phase evaluator");
  add_common(sim, opt);
  sim->add_option("--c1", opt.c1, "scaling constant C1");
  sim->add_option("--c2", opt.c2, "phase threshold constant C2");

  std::string suite;
  CLI::App* ver = app.add_subcommand("verify", "run an invariant suite");
  ver->add_option("suite", suite, "suite name")
      ->required()
      ->check(CLI::IsMember(
          {"spectral", "gap", "factorization", "k5", "oracles"}));
  ver->add_option("--seed", opt.seed, "master seed");
  ver->add_option("--tolerance", opt.tolerance, "numeric comparison slack");
  ver->add_option("--json", opt.json_path, "also write the report to PATH");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (ver->parsed()) return run_verify(suite, opt);
    opt.simulate = sim->parsed();
    if (opt.problem == "star-forest" && opt.components.empty())
      throw std::runtime_error("star-forest needs at least one --component");
    return run_detection(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
