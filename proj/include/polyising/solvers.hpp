#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "polyising/poly.hpp"

namespace polyising {

enum class Algorithm { polysimcim, hopfield, leleu, tgdcc, greedy };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::polysimcim, Algorithm::hopfield,
                                               Algorithm::leleu, Algorithm::tgdcc,
                                               Algorithm::greedy};

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);

/// Hyperparameters for every solver. Each solver reads only its own fields.
///
/// Sign convention: all continuous solvers descend H, i.e. the feedback term
/// is -xi * grad H (the TGD+CC coupling uses -J). Setting `maximize` restores
/// the literal "+xi * grad H" form, which ascends H for xi > 0.
struct SolverConfig {
  int steps = 1000;
  double xi = 0.1;
  double sigma = 0.05;
  double momentum_alpha = 0.99;
  double x_sat = 1.0;
  // nu(t) = nu_O * tanh(nu_S * (t / steps - 0.5)) - nu_D
  double nu_O = 1.0;
  double nu_D = 0.5;
  double nu_S = 5.0;
  // Hopfield-Tank
  double beta = 1.0;
  // Leleu error variables
  double beta_e = 0.1;
  double a_target = 1.0;
  // TGD+CC
  double epsilon = 0.1;
  double rho_th = 1.0;
  std::optional<int> cc_count;          // default max(1, ceil(0.01 * n_terms))
  std::optional<double> cc_magnitude;   // default mean |coeff|
  int steady_window = 50;
  std::optional<double> steady_tol;     // default 1e-4 * x_sat

  bool maximize = false;
  bool record_trajectory = false;
  int trajectory_stride = 1;

  /// Throws polyising::Error on violated invariants.
  void validate() const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Per-algorithm defaults used when no tuned configuration is available.
SolverConfig default_config(Algorithm a);

void to_json(nlohmann::json& j, const SolverConfig& c);
/// Missing keys keep the values already in `c`; unknown keys are rejected.
void from_json(const nlohmann::json& j, SolverConfig& c);
SolverConfig load_config(const std::filesystem::path& path, const SolverConfig& base);

struct TrajectoryFrame {
  int step = 0;
  std::vector<double> x;
};

struct RunResult {
  SpinVector spins;
  double energy = 0.0;
  std::vector<TrajectoryFrame> trajectory;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
};

/// Annealing gain O * tanh(S * (t / steps - 0.5)) - D.
double anneal_nu(double t, double steps, double O, double D, double S);

RunResult polysimcim_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed);
RunResult hopfield_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed);
RunResult leleu_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed);
RunResult tgdcc_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed);

struct GreedyStats {
  std::size_t moves = 0;
  std::vector<double> energies;  // energy after each accepted move, starting energy first
};

/// Steepest single-flip descent from `start`; ties go to the lowest index.
RunResult greedy_run(const PolySpec& poly, SpinVector start, GreedyStats* stats = nullptr);

/// Uniform random spin vector drawn from `seed`.
SpinVector random_spins(std::size_t n, std::uint64_t seed);

/// Dispatches one run. Greedy draws its start point from `seed`.
RunResult solve_once(const PolySpec& poly, Algorithm a, const SolverConfig& cfg,
                     std::uint64_t seed);

struct RunFailure {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct BatchResult {
  std::vector<RunResult> runs;        // successful runs, ascending run_index
  std::vector<RunFailure> failures;   // ascending run_index
};

/// Seed of run `j` in a batch started from `base_seed`.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t j) noexcept;

/// Worker count: POLYISING_THREADS if set, else hardware concurrency.
unsigned default_workers();

/// R independent runs. Results do not depend on `workers` (0 = default).
BatchResult batch_solve(const PolySpec& poly, Algorithm a, const SolverConfig& cfg,
                        std::size_t runs, std::uint64_t base_seed, unsigned workers = 0);

/// CSV "step,var_index,value" (var_index 1-based).
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryFrame>& frames);

}  // namespace polyising
