// polyising command-line front end.
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polyising/error.hpp"
#include "polyising/harness.hpp"
#include "polyising/instances.hpp"
#include "polyising/poly.hpp"
#include "polyising/protein.hpp"
#include "polyising/reduction.hpp"
#include "polyising/solvers.hpp"
#include "polyising/text.hpp"

namespace fs = std::filesystem;
using namespace polyising;

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto tok : split(text, ',')) {
    if (tok.empty()) continue;
    // a:b:c ranges, e.g. 10:100:10
    const auto parts = split(tok, ':');
    try {
      if (parts.size() == 1) {
        out.push_back(std::stoul(std::string(parts[0])));
      } else if (parts.size() == 3) {
        const auto lo = std::stoul(std::string(parts[0])), hi = std::stoul(std::string(parts[1])),
                   step = std::stoul(std::string(parts[2]));
        if (step == 0) throw UsageError("size range step must be positive");
        for (auto n = lo; n <= hi; n += step) out.push_back(n);
      } else {
        throw UsageError("bad size '" + std::string(tok) + "'");
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad size '" + std::string(tok) + "'");
    }
  }
  if (out.empty()) throw UsageError("no sizes given");
  return out;
}

template <class T, class F>
std::vector<T> parse_list(const std::vector<std::string>& items, F&& one) {
  std::vector<T> out;
  for (const auto& item : items)
    for (auto tok : split(item, ','))
      if (!tok.empty()) {
        try {
          out.push_back(one(tok));
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string spins_to_string(const SpinVector& s) {
  std::string out;
  for (Spin v : s) out += v < 0 ? '-' : '+';
  return out;
}

// Best-known store: {"<instance seed>": energy, ...}
std::map<std::uint64_t, double> load_store(const fs::path& path) {
  std::map<std::uint64_t, double> out;
  if (!fs::exists(path)) return out;
  std::ifstream in(path);
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [k, v] : j.items()) out[std::stoull(k)] = v.get<double>();
  } catch (const std::exception& e) {
    throw Error("malformed best-known store " + path.string() + ": " + e.what());
  }
  return out;
}

void save_store(const fs::path& path, const std::map<std::uint64_t, double>& store) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : store) j[std::to_string(k)] = v;
  write_text(path, j.dump(2) + "\n");
}

SolverConfig config_for(Algorithm a, const std::string& path, std::optional<int> steps) {
  SolverConfig c = default_config(a);
  if (!path.empty()) c = load_config(path, c);
  if (steps) c.steps = *steps;
  return c;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string cls = "I";
  std::string sizes = "10";
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  double drop_prob = 0.9;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  const auto cls = parse_instance_class(a.cls);
  const auto suite = generate_suite(cls, parse_sizes(a.sizes), a.instances, a.seed, a.drop_prob);
  fs::create_directories(a.out);
  for (const auto& e : suite) {
    const auto name = "class" + std::string(to_string(cls)) + "_n" + std::to_string(e.recipe.n_vars) +
                      "_" + std::to_string(e.index) + ".pubo";
    write_pubo(fs::path(a.out) / name, e.poly, e.recipe.describe());
    std::cout << (fs::path(a.out) / name).string() << " " << e.poly.size() << " terms\n";
  }
  return 0;
}

struct SolveArgs {
  std::string file;
  std::string algorithm = "polysimcim";
  std::string config;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::optional<int> steps;
  unsigned workers = 0;
  std::string trajectory;
  std::string json_out;
  bool oracle = false;
};

int run_solve(const SolveArgs& a) {
  const auto poly = read_pubo(a.file);
  const auto alg = parse_algorithm(a.algorithm);
  auto cfg = config_for(alg, a.config, a.steps);
  const auto batch = batch_solve(poly, alg, cfg, a.runs, a.seed, a.workers);
  for (const auto& f : batch.failures)
    std::cerr << "run " << f.run_index << " failed: " << f.message << "\n";
  if (batch.runs.empty()) throw Error("every run failed");

  std::vector<double> energies;
  for (const auto& r : batch.runs) energies.push_back(r.energy);
  const auto best = std::min_element(batch.runs.begin(), batch.runs.end(),
                                     [](const auto& x, const auto& y) { return x.energy < y.energy; });
  std::cout << "algorithm " << to_string(alg) << "\n"
            << "runs " << batch.runs.size() << " failed " << batch.failures.size() << "\n"
            << "best_energy " << format_real(best->energy) << "\n"
            << "median_energy " << format_real(median(energies)) << "\n"
            << "best_spins " << spins_to_string(best->spins) << "\n";
  std::optional<double> oracle;
  if (a.oracle) {
    oracle = exhaustive_minimum(poly, 30).energy;
    std::cout << "oracle_energy " << format_real(*oracle) << "\n";
  }
  if (!a.trajectory.empty()) {
    cfg.record_trajectory = true;
    const auto r = solve_once(poly, alg, cfg, run_seed(a.seed, 0));
    std::ofstream out(a.trajectory);
    if (!out) throw Error("cannot write " + a.trajectory);
    write_trajectory_csv(out, r.trajectory);
  }
  if (!a.json_out.empty()) {
    nlohmann::json j{{"file", a.file},
                     {"algorithm", to_string(alg)},
                     {"config", cfg},
                     {"seed", a.seed},
                     {"energies", energies},
                     {"failures", batch.failures.size()},
                     {"best_energy", best->energy},
                     {"oracle", oracle ? nlohmann::json(*oracle) : nlohmann::json(nullptr)}};
    write_text(a.json_out, j.dump(2) + "\n");
  }
  return 0;
}

struct BenchmarkArgs {
  std::vector<std::string> classes{"I"};
  std::string sizes = "10";
  std::size_t instances = 10;
  std::size_t runs = 2000;
  int steps = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> algorithms;
  bool no_tune = false;
  std::size_t tune_budget = 200;
  std::size_t tune_runs = 32;
  std::size_t oracle_max_vars = 20;
  double drop_prob = 0.9;
  unsigned workers = 0;
  std::vector<std::string> configs;
  std::string out = "report.json";
  std::string csv_dir;
  std::string store;
};

int run_benchmark_cmd(const BenchmarkArgs& a) {
  BenchmarkOptions o;
  o.classes = parse_list<InstanceClass>(a.classes, parse_instance_class);
  o.sizes = parse_sizes(a.sizes);
  o.instances = a.instances;
  o.runs = a.runs;
  o.steps = a.steps;
  o.seed = a.seed;
  if (!a.algorithms.empty()) o.algorithms = parse_list<Algorithm>(a.algorithms, parse_algorithm);
  o.tune = !a.no_tune;
  o.tune_budget = a.tune_budget;
  o.tune_runs = a.tune_runs;
  o.oracle_max_vars = a.oracle_max_vars;
  o.drop_prob = a.drop_prob;
  o.workers = a.workers;
  for (const auto& spec : a.configs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--config expects ALG=FILE, got '" + spec + "'");
    Algorithm alg;
    try {
      alg = parse_algorithm(spec.substr(0, eq));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    o.base_configs[alg] = load_config(spec.substr(eq + 1), default_config(alg));
  }
  if (!a.store.empty()) o.prior_best = load_store(a.store);

  const auto report = run_benchmark(o);
  write_text(a.out, to_json(report).dump(2) + "\n");
  std::cout << "report " << a.out << "\n";

  if (!a.csv_dir.empty())
    for (auto cls : o.classes) {
      const std::string c(to_string(cls));
      write_text(fs::path(a.csv_dir) / ("class" + c + "_best_eta.csv"), panel_csv(report, cls, true));
      write_text(fs::path(a.csv_dir) / ("class" + c + "_median_eta.csv"), panel_csv(report, cls, false));
      write_text(fs::path(a.csv_dir) / ("class" + c + "_histogram.csv"), histogram_csv(report, cls));
    }
  if (!a.store.empty()) {
    auto store = o.prior_best;
    for (const auto& inst : report.instances) {
      bool any = inst.oracle.has_value() || inst.prior_best.has_value();
      for (const auto& r : inst.algorithms) any = any || !r.energies.empty();
      if (!any) continue;
      auto [it, fresh] = store.emplace(inst.recipe.seed, inst.best_known);
      if (!fresh) it->second = std::min(it->second, inst.best_known);
    }
    save_store(a.store, store);
  }
  for (const auto& r : report.rows)
    std::cout << to_string(r.class_id) << " N=" << r.size << " " << to_string(r.algorithm)
              << " best_eta " << format_real(r.best_eta.median) << " median_eta "
              << format_real(r.median_eta.median) << "\n";
  return 0;
}

struct ReduceArgs {
  std::string file;
  std::string out;
  std::string overhead;
  std::optional<double> penalty;
};

int run_reduce(const ReduceArgs& a) {
  const auto poly = read_pubo(a.file);
  QuadratizeOptions qo;
  qo.penalty_weight = a.penalty;
  const auto q = quadratize_spin(poly, 1e-12, qo);
  const OverheadReport row{poly.n_vars(), poly.size(), q.poly.n_vars(), q.poly.size()};
  if (!a.out.empty()) {
    std::string comment = "quadratized from " + a.file + "\npenalty " +
                          format_real(q.map.penalty_weight);
    for (const auto& d : q.map.ancilla_defs)
      comment += "\nancilla " + std::to_string(d.ancilla + 1) + " = " +
                 std::to_string(d.parents.first + 1) + " * " + std::to_string(d.parents.second + 1);
    write_pubo(a.out, q.poly, comment);
  }
  const std::vector<OverheadReport> rows{row};
  const auto csv = overhead_csv(rows);
  if (!a.overhead.empty()) write_text(a.overhead, csv);
  std::cout << csv;
  return 0;
}

struct FoldArgs {
  std::string seq;
  std::string model = "HP";
  bool oracle = false;
  std::string pubo_out;
  bool solve = false;
  std::size_t runs = 500;
  std::uint64_t seed = 0;
  std::string config;
  std::optional<int> steps;
  unsigned workers = 0;
  std::optional<double> lambda;
  std::string csv;
};

int run_fold(const FoldArgs& a) {
  protein::Sequence seq{a.seq, protein::parse_contact_model(a.model)};
  seq.validate();
  std::optional<protein::LatticeFold> shown;
  if (a.oracle) {
    const auto f = protein::brute_force_fold(seq);
    std::cout << format_real(f.energy) << "\n"
              << "turn_bits " << protein::bits_to_string(f.turn_bits) << "\n";
    shown = f;
  }
  if (!a.pubo_out.empty() || a.solve) {
    const auto poly = protein::build_fold_pubo(seq, a.lambda);
    if (!a.pubo_out.empty())
      write_pubo(a.pubo_out, poly,
                 "fold " + a.seq + " model " + a.model + "\nfree turn bits " +
                     std::to_string(poly.n_vars()));
    if (a.solve) {
      const auto cfg = config_for(Algorithm::polysimcim, a.config, a.steps);
      const auto batch = batch_solve(poly, Algorithm::polysimcim, cfg, a.runs, a.seed, a.workers);
      if (batch.runs.empty()) throw Error("every run failed");
      const auto best = std::min_element(batch.runs.begin(), batch.runs.end(),
                                         [](const auto& x, const auto& y) { return x.energy < y.energy; });
      const auto fold = protein::fold_from_spins(seq, best->spins, a.lambda);
      std::size_t hits = 0;
      for (const auto& r : batch.runs) hits += r.energy <= best->energy + 1e-9;
      std::cout << "solver_energy " << format_real(fold.energy) << "\n"
                << "solver_feasible " << (fold.feasible ? "yes" : "no") << "\n"
                << "solver_hits " << hits << "/" << a.runs << "\n";
      if (!shown) shown = fold;
    }
  }
  if (!a.csv.empty()) {
    if (!shown) shown = protein::brute_force_fold(seq);
    write_text(a.csv, protein::fold_csv(seq, *shown));
  }
  if (!a.oracle && !a.solve && a.pubo_out.empty() && a.csv.empty())
    throw UsageError("fold needs at least one of --oracle, --solve, --pubo-out, --csv");
  return 0;
}

int run_counts(long min_m, long max_m) {
  if (min_m < 4 || max_m < min_m) throw UsageError("need 4 <= --min-M <= --max-M");
  std::cout << "M,n_phys,n_penalty,n_pair,n_reduction,n_pubo,n_qubo\n";
  for (long m = min_m; m <= max_m; ++m) {
    const auto c = protein::bit_counts(m);
    std::cout << m << "," << c.n_phys << "," << c.n_penalty << "," << c.n_pair << ","
              << c.n_reduction << "," << c.n_pubo << "," << c.n_qubo << "\n";
  }
  return 0;
}

struct TuneArgs {
  std::string file;
  std::string algorithm = "polysimcim";
  std::string config;
  std::optional<int> steps;
  std::size_t budget = 200;
  std::size_t runs = 32;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string out;
};

int run_tune(const TuneArgs& a) {
  const auto poly = read_pubo(a.file);
  const auto alg = parse_algorithm(a.algorithm);
  TuneOptions o;
  o.budget = a.budget;
  o.runs_per_eval = a.runs;
  o.seed = a.seed;
  o.workers = a.workers;
  o.base = config_for(alg, a.config, a.steps);
  const auto r = tune(poly, alg, o);
  nlohmann::json j = r.best;
  std::cout << j.dump(2) << "\n"
            << "cost " << format_real(r.best_cost) << " (base " << format_real(r.cost_history.front())
            << ", " << r.diverged << " of " << r.cost_history.size() << " evaluations failed)\n";
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial Ising toolkit: PUBO instances, solvers, reduction and lattice folding"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a seeded suite of random cubic instances");
  g->add_option("--class", gen.cls, "I, II or III")->capture_default_str();
  g->add_option("--sizes", gen.sizes, "comma list or lo:hi:step")->capture_default_str();
  g->add_option("--instances", gen.instances)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--drop-prob", gen.drop_prob, "class III drop probability")->capture_default_str();
  g->add_option("--out", gen.out, "output directory")->required();

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "run one algorithm on a PUBO file");
  s->add_option("file", sol.file)->required()->check(CLI::ExistingFile);
  s->add_option("--algorithm,-a", sol.algorithm)->capture_default_str();
  s->add_option("--config", sol.config, "JSON solver config")->check(CLI::ExistingFile);
  s->add_option("--runs", sol.runs)->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", sol.seed)->capture_default_str();
  s->add_option("--steps", sol.steps);
  s->add_option("--workers", sol.workers, "0 = hardware / POLYISING_THREADS");
  s->add_option("--trajectory", sol.trajectory, "CSV of run 0 amplitudes");
  s->add_option("--json", sol.json_out, "write run energies as JSON");
  s->add_flag("--oracle", sol.oracle, "also enumerate the exact minimum (N <= 30)");

  BenchmarkArgs bm;
  auto* b = app.add_subcommand("benchmark", "tune, solve and aggregate a generated suite");
  b->add_option("--class", bm.classes, "I, II, III (repeat or comma-separate)")->capture_default_str();
  b->add_option("--sizes", bm.sizes)->capture_default_str();
  b->add_option("--instances", bm.instances)->capture_default_str();
  b->add_option("--runs", bm.runs)->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--steps", bm.steps)->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--seed", bm.seed)->capture_default_str();
  b->add_option("--algorithms", bm.algorithms, "default: all five");
  b->add_flag("--no-tune", bm.no_tune, "use base configs as they are");
  b->add_option("--tune-budget", bm.tune_budget)->capture_default_str();
  b->add_option("--tune-runs", bm.tune_runs)->capture_default_str();
  b->add_option("--oracle-max-vars", bm.oracle_max_vars)->capture_default_str();
  b->add_option("--drop-prob", bm.drop_prob)->capture_default_str();
  b->add_option("--workers", bm.workers);
  b->add_option("--config", bm.configs, "base config per algorithm, ALG=FILE");
  b->add_option("--out", bm.out, "report JSON")->capture_default_str();
  b->add_option("--csv-dir", bm.csv_dir, "panel and histogram CSVs");
  b->add_option("--store", bm.store, "best-known energy store (JSON, read and updated)");

  ReduceArgs red;
  auto* r = app.add_subcommand("reduce", "quadratize a spin PUBO and report the overhead");
  r->add_option("file", red.file)->required()->check(CLI::ExistingFile);
  r->add_option("--out", red.out, "quadratic spin PUBO");
  r->add_option("--overhead", red.overhead, "overhead CSV");
  r->add_option("--penalty", red.penalty, "penalty weight (default 1 + sum |c|)");

  FoldArgs fold;
  auto* f = app.add_subcommand("fold", "2D lattice protein folding");
  f->add_option("--seq", fold.seq)->required();
  f->add_option("--model", fold.model, "HP or MJ")->capture_default_str();
  f->add_flag("--oracle", fold.oracle, "brute-force ground state");
  f->add_option("--pubo-out", fold.pubo_out, "write the fold PUBO");
  f->add_flag("--solve", fold.solve, "run PolySimCIM on the fold PUBO");
  f->add_option("--runs", fold.runs)->capture_default_str()->check(CLI::PositiveNumber);
  f->add_option("--seed", fold.seed)->capture_default_str();
  f->add_option("--config", fold.config)->check(CLI::ExistingFile);
  f->add_option("--steps", fold.steps);
  f->add_option("--workers", fold.workers);
  f->add_option("--lambda", fold.lambda, "overlap penalty");
  f->add_option("--csv", fold.csv, "fold coordinates CSV");

  long min_m = 4, max_m = 14;
  auto* c = app.add_subcommand("counts", "bit counts of the turn encoding");
  c->add_option("--min-M", min_m)->capture_default_str();
  c->add_option("--max-M", max_m)->capture_default_str();

  TuneArgs tu;
  auto* t = app.add_subcommand("tune", "search hyperparameters on one instance");
  t->add_option("file", tu.file)->required()->check(CLI::ExistingFile);
  t->add_option("--algorithm,-a", tu.algorithm)->capture_default_str();
  t->add_option("--config", tu.config, "base config")->check(CLI::ExistingFile);
  t->add_option("--steps", tu.steps);
  t->add_option("--budget", tu.budget)->capture_default_str();
  t->add_option("--runs", tu.runs, "runs per evaluation")->capture_default_str();
  t->add_option("--seed", tu.seed)->capture_default_str();
  t->add_option("--workers", tu.workers);
  t->add_option("--out", tu.out, "best config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*g) return run_generate(gen);
    if (*s) return run_solve(sol);
    if (*b) return run_benchmark_cmd(bm);
    if (*r) return run_reduce(red);
    if (*f) return run_fold(fold);
    if (*c) return run_counts(min_m, max_m);
    if (*t) return run_tune(tu);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
