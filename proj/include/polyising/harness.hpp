#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyising/instances.hpp"
#include "polyising/poly.hpp"
#include "polyising/solvers.hpp"

namespace polyising {

/// Figure of merit run_energy / best_energy. Requires best_energy < 0.
double eta(double run_energy, double best_energy);

struct BestKnown {
  double energy = 0.0;
  bool reached = true;  // some solver run attained `energy`
};

/// Minimum over `energies` and the optional oracle/prior values.
BestKnown best_known(std::span<const double> energies, std::optional<double> oracle = {});

/// Linear-interpolation quantile, p in [0, 1] (position p * (n - 1)).
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

struct Spread {
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

Spread spread(std::vector<double> values);

// ---------------------------------------------------------------------------
// Benchmark reports

struct AlgorithmRuns {
  Algorithm algorithm = Algorithm::polysimcim;
  std::vector<double> energies;  // successful runs, run-index order
  std::size_t failures = 0;
  // Filled by aggregate():
  std::vector<double> etas;
  double best_eta = 0.0;
  double median_eta = 0.0;
};

struct InstanceResult {
  InstanceRecipe recipe;
  std::size_t index = 0;
  std::size_t n_terms = 0;
  std::optional<double> oracle;      // exhaustive minimum when computed
  std::optional<double> prior_best;  // best energy persisted from earlier runs
  std::vector<AlgorithmRuns> algorithms;
  // Filled by aggregate():
  double best_known = 0.0;
  bool reached = false;
  bool eta_defined = false;
};

struct AggregateRow {
  InstanceClass class_id = InstanceClass::I;
  std::size_t size = 0;
  Algorithm algorithm = Algorithm::polysimcim;
  std::size_t instances = 0;
  Spread best_eta;    // across instances of per-instance maximum eta
  Spread median_eta;  // across instances of per-instance median eta
};

struct Histogram {
  InstanceClass class_id = InstanceClass::I;
  std::size_t size = 0;
  Algorithm algorithm = Algorithm::polysimcim;
  double width = 0.01;
  long first_bin = 0;  // bin k covers [k * width, (k + 1) * width)
  std::vector<std::size_t> counts;
};

struct TunedConfig {
  InstanceClass class_id = InstanceClass::I;
  std::size_t size = 0;
  Algorithm algorithm = Algorithm::polysimcim;
  SolverConfig config;
  std::optional<double> cost;  // absent when tuning was skipped
};

struct BenchmarkReport {
  nlohmann::json options;  // echo of the run recipe
  std::vector<TunedConfig> configs;
  std::vector<InstanceResult> instances;
  std::vector<AggregateRow> rows;
  std::vector<Histogram> histograms;
};

inline constexpr double kHistogramWidth = 0.01;

/// Computes best-known energies, eta arrays, per-instance best/median eta,
/// cross-instance spreads per (class, size, algorithm) and eta histograms
/// for the largest size of each class. Deterministic in its input.
BenchmarkReport aggregate(std::vector<InstanceResult> instances, nlohmann::json options = {},
                          std::vector<TunedConfig> configs = {});

nlohmann::json to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& j);

/// CSV "size,algorithm,median,p25,p75" for one class; `best` selects the
/// maximum-eta panel, otherwise the median-eta panel.
std::string panel_csv(const BenchmarkReport& report, InstanceClass class_id, bool best);

/// CSV "bin_lo,bin_hi,algorithm,count" for one class.
std::string histogram_csv(const BenchmarkReport& report, InstanceClass class_id);

// ---------------------------------------------------------------------------
// Hyperparameter tuning

/// 0.25 * min(mean / |first_mean|, 1) + min(min / |first_min|, 1).
double tune_cost(std::span<const double> energies, double first_step_mean, double first_step_min);

struct TuneOptions {
  std::size_t budget = 200;        // evaluations
  std::size_t runs_per_eval = 32;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  SolverConfig base;               // evaluated first; untuned fields kept
};

struct TuneResult {
  SolverConfig best;
  double best_cost = 0.0;
  std::vector<double> cost_history;  // one entry per evaluation
  double first_mean = 0.0;
  double first_min = 0.0;
  std::size_t diverged = 0;
};

struct TuneParam {
  std::string name;
  double SolverConfig::*field;
  double lo_log10;
  double hi_log10;
};

/// Hyperparameters searched for `a` (empty for greedy).
std::vector<TuneParam> tune_space(Algorithm a);

/// Random initial population (the base config first) followed by
/// differential evolution in log10 space.
TuneResult tune(const PolySpec& poly, Algorithm a, const TuneOptions& options);

// ---------------------------------------------------------------------------
// Full protocol

struct BenchmarkOptions {
  std::vector<InstanceClass> classes{InstanceClass::I};
  std::vector<std::size_t> sizes{10};
  std::size_t instances = 10;
  std::size_t runs = 2000;
  int steps = 1000;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  bool tune = true;
  std::size_t tune_budget = 200;
  std::size_t tune_runs = 32;
  std::size_t oracle_max_vars = 20;
  double drop_prob = 0.9;
  unsigned workers = 0;
  std::map<Algorithm, SolverConfig> base_configs;  // default_config() otherwise
  /// Best energies from earlier runs, keyed by instance seed.
  std::map<std::uint64_t, double> prior_best;

  nlohmann::json echo() const;
};

/// Generates the suites, tunes one config per (class, size, algorithm) on the
/// first instance of that size, runs every algorithm on every instance and
/// aggregates. Independent of `workers`.
BenchmarkReport run_benchmark(const BenchmarkOptions& options);

}  // namespace polyising
