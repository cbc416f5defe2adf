#include "polyising/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "polyising/error.hpp"
#include "polyising/rng.hpp"
#include "polyising/text.hpp"

namespace polyising {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::polysimcim: return "polysimcim";
    case Algorithm::hopfield: return "hopfield";
    case Algorithm::leleu: return "leleu";
    case Algorithm::tgdcc: return "tgdcc";
    case Algorithm::greedy: return "greedy";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == name) return a;
  throw Error("unknown algorithm '" + std::string(name) +
              "' (expected polysimcim, hopfield, leleu, tgdcc or greedy)");
}

void SolverConfig::validate() const {
  if (steps < 1) throw Error("steps must be >= 1");
  if (!(sigma >= 0.0)) throw Error("sigma must be >= 0");
  if (!(x_sat > 0.0)) throw Error("x_sat must be > 0");
  if (!(momentum_alpha >= 0.0 && momentum_alpha < 1.0))
    throw Error("momentum_alpha must lie in [0, 1)");
  if (!(beta > 0.0)) throw Error("beta must be > 0");
  if (steady_window < 1) throw Error("steady_window must be >= 1");
  if (cc_count && *cc_count < 0) throw Error("cc_count must be >= 0");
  if (cc_magnitude && !(*cc_magnitude >= 0.0)) throw Error("cc_magnitude must be >= 0");
  if (trajectory_stride < 1) throw Error("trajectory_stride must be >= 1");
  for (double v : {xi, sigma, x_sat, nu_O, nu_D, nu_S, beta, beta_e, a_target, epsilon, rho_th})
    if (!std::isfinite(v)) throw Error("non-finite hyperparameter");
}

SolverConfig default_config(Algorithm a) {
  SolverConfig c;
  switch (a) {
    case Algorithm::polysimcim:
      c.xi = 0.02;
      c.sigma = 0.05;
      c.nu_O = 0.2;
      c.nu_D = 0.1;
      c.nu_S = 5.0;
      break;
    case Algorithm::hopfield:
      c.xi = 0.1;
      c.beta = 0.01;
      break;
    case Algorithm::leleu:
      // Explicit steps on x - x^3 blow up once |x| passes ~1.5, so keep the
      // feedback small and the amplitude target below the gain.
      c.xi = 0.005;
      c.nu_O = 0.2;
      c.nu_D = -0.3;
      c.nu_S = 5.0;
      c.beta_e = 0.05;
      c.a_target = 0.2;
      break;
    case Algorithm::tgdcc:
      c.xi = 0.001;
      c.sigma = 0.01;
      c.epsilon = 10.0;
      c.rho_th = 1.0;
      c.nu_D = 0.5;
      break;
    case Algorithm::greedy:
      break;
  }
  return c;
}

void to_json(nlohmann::json& j, const SolverConfig& c) {
  j = nlohmann::json{{"steps", c.steps},
                     {"xi", c.xi},
                     {"sigma", c.sigma},
                     {"momentum_alpha", c.momentum_alpha},
                     {"x_sat", c.x_sat},
                     {"nu_O", c.nu_O},
                     {"nu_D", c.nu_D},
                     {"nu_S", c.nu_S},
                     {"beta", c.beta},
                     {"beta_e", c.beta_e},
                     {"a_target", c.a_target},
                     {"epsilon", c.epsilon},
                     {"rho_th", c.rho_th},
                     {"steady_window", c.steady_window},
                     {"maximize", c.maximize},
                     {"record_trajectory", c.record_trajectory},
                     {"trajectory_stride", c.trajectory_stride}};
  j["cc_count"] = c.cc_count ? nlohmann::json(*c.cc_count) : nlohmann::json(nullptr);
  j["cc_magnitude"] = c.cc_magnitude ? nlohmann::json(*c.cc_magnitude) : nlohmann::json(nullptr);
  j["steady_tol"] = c.steady_tol ? nlohmann::json(*c.steady_tol) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, SolverConfig& c) {
  if (!j.is_object()) throw Error("solver config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto num = [&](double& dst) { dst = value.get<double>(); };
    auto opt_num = [&](auto& dst) {
      using T = typename std::decay_t<decltype(dst)>::value_type;
      if (value.is_null())
        dst.reset();
      else
        dst = value.get<T>();
    };
    if (key == "steps") c.steps = value.get<int>();
    else if (key == "xi") num(c.xi);
    else if (key == "sigma") num(c.sigma);
    else if (key == "momentum_alpha") num(c.momentum_alpha);
    else if (key == "x_sat") num(c.x_sat);
    else if (key == "nu_O") num(c.nu_O);
    else if (key == "nu_D") num(c.nu_D);
    else if (key == "nu_S") num(c.nu_S);
    else if (key == "beta") num(c.beta);
    else if (key == "beta_e") num(c.beta_e);
    else if (key == "a_target") num(c.a_target);
    else if (key == "epsilon") num(c.epsilon);
    else if (key == "rho_th") num(c.rho_th);
    else if (key == "cc_count") opt_num(c.cc_count);
    else if (key == "cc_magnitude") opt_num(c.cc_magnitude);
    else if (key == "steady_window") c.steady_window = value.get<int>();
    else if (key == "steady_tol") opt_num(c.steady_tol);
    else if (key == "maximize") c.maximize = value.get<bool>();
    else if (key == "record_trajectory") c.record_trajectory = value.get<bool>();
    else if (key == "trajectory_stride") c.trajectory_stride = value.get<int>();
    else throw Error("unknown solver config key '" + key + "'");
  }
}

SolverConfig load_config(const std::filesystem::path& path, const SolverConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  SolverConfig c = base;
  try {
    from_json(j, c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

double anneal_nu(double t, double steps, double O, double D, double S) {
  return O * std::tanh(S * (t / steps - 0.5)) - D;
}

namespace {

constexpr double kDivergenceFactor = 1e6;

SpinVector sign_spins(const std::vector<double>& x) {
  SpinVector s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] < 0.0 ? Spin{-1} : Spin{1};
  return s;
}

RunResult finish(const PolySpec& poly, const std::vector<double>& x, std::uint64_t seed,
                 std::vector<TrajectoryFrame> trajectory) {
  RunResult r;
  r.spins = sign_spins(x);
  r.energy = evaluate(poly, std::span<const Spin>(r.spins));
  r.seed = seed;
  r.trajectory = std::move(trajectory);
  return r;
}

void check_amplitude(double v, double limit, int step, std::string_view who) {
  if (!std::isfinite(v) || std::abs(v) > limit)
    throw DivergenceError(std::string(who) + " diverged at step " + std::to_string(step) +
                          " (try a smaller xi)");
}

void require_nonempty(const PolySpec& poly) {
  if (poly.n_vars() == 0 || poly.empty()) throw Error("cannot solve an empty polynomial");
}

class Recorder {
 public:
  explicit Recorder(const SolverConfig& cfg)
      : on_(cfg.record_trajectory), stride_(cfg.trajectory_stride), last_(cfg.steps) {}

  template <class F>
  void maybe(int step, F&& snapshot) {
    if (on_ && (step % stride_ == 0 || step == last_)) frames_.push_back({step, snapshot()});
  }
  std::vector<TrajectoryFrame> take() { return std::move(frames_); }

 private:
  bool on_;
  int stride_;
  int last_;
  std::vector<TrajectoryFrame> frames_;
};

}  // namespace

RunResult polysimcim_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require_nonempty(poly);
  const std::size_t n = poly.n_vars();
  const double feedback = cfg.maximize ? cfg.xi : -cfg.xi;
  const double limit = kDivergenceFactor * cfg.x_sat;
  CounterRng rng(seed);
  std::vector<double> x(n, 0.0), v(n, 0.0), g(n);
  Recorder rec(cfg);
  rec.maybe(0, [&] { return x; });
  for (int t = 0; t < cfg.steps; ++t) {
    const double nu = anneal_nu(t, cfg.steps, cfg.nu_O, cfg.nu_D, cfg.nu_S);
    gradient_unchecked(poly, x.data(), g.data());
    for (std::size_t i = 0; i < n; ++i) {
      double dx = nu * x[i] + feedback * g[i];
      if (cfg.sigma > 0.0) dx += cfg.sigma * rng.normal();
      v[i] = cfg.momentum_alpha * v[i] + dx;
      x[i] += v[i];
      check_amplitude(x[i], limit, t, "polysimcim");
      x[i] = std::clamp(x[i], -cfg.x_sat, cfg.x_sat);
    }
    rec.maybe(t + 1, [&] { return x; });
  }
  return finish(poly, x, seed, rec.take());
}

RunResult hopfield_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require_nonempty(poly);
  const std::size_t n = poly.n_vars();
  const double feedback = cfg.maximize ? cfg.xi : -cfg.xi;
  const double limit = kDivergenceFactor * cfg.x_sat;
  CounterRng rng(seed);
  std::vector<double> x(n), u(n), g(n);
  for (auto& xi : x) xi = 1e-2 * rng.normal();  // N(0, 1e-4)
  Recorder rec(cfg);
  rec.maybe(0, [&] { return x; });
  for (int t = 0; t < cfg.steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) u[i] = std::tanh(x[i] / cfg.beta);
    gradient_unchecked(poly, u.data(), g.data());
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += -x[i] + feedback * g[i];
      check_amplitude(x[i], limit, t, "hopfield");
    }
    rec.maybe(t + 1, [&] { return x; });
  }
  return finish(poly, x, seed, rec.take());
}

RunResult leleu_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require_nonempty(poly);
  const std::size_t n = poly.n_vars();
  const double feedback = cfg.maximize ? cfg.xi : -cfg.xi;
  const double limit = kDivergenceFactor * cfg.x_sat;
  CounterRng rng(seed);
  std::vector<double> x(n), e(n, 1.0), g(n);
  for (auto& xi : x) xi = 1e-2 * rng.normal();
  Recorder rec(cfg);
  rec.maybe(0, [&] { return x; });
  for (int t = 0; t < cfg.steps; ++t) {
    const double nu = anneal_nu(t, cfg.steps, cfg.nu_O, cfg.nu_D, cfg.nu_S);
    gradient_unchecked(poly, x.data(), g.data());
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      const double dx = nu * xi - xi * xi * xi + feedback * e[i] * g[i];
      const double de = -cfg.beta_e * (xi * xi - cfg.a_target) * e[i];
      x[i] = xi + dx;
      e[i] += de;
      check_amplitude(x[i], limit, t, "leleu");
      if (!(e[i] > 0.0) || !std::isfinite(e[i]))
        throw DivergenceError("leleu error variable lost positivity at step " + std::to_string(t) +
                              " (try a smaller beta_e)");
    }
    rec.maybe(t + 1, [&] { return x; });
  }
  return finish(poly, x, seed, rec.take());
}

RunResult tgdcc_run(const PolySpec& poly, const SolverConfig& cfg, std::uint64_t seed) {
  using cplx = std::complex<double>;
  cfg.validate();
  require_nonempty(poly);
  const std::size_t n = poly.n_vars();
  const double limit = kDivergenceFactor * cfg.x_sat;
  const double coupling_sign = cfg.maximize ? 1.0 : -1.0;

  std::vector<std::size_t> coupling_terms;  // non-constant terms
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k)
    if (poly[k].degree() > 0) {
      coupling_terms.push_back(k);
      abs_sum += std::abs(poly[k].coeff);
    }
  const std::size_t cc_count = std::min<std::size_t>(
      coupling_terms.size(),
      cfg.cc_count ? static_cast<std::size_t>(*cfg.cc_count)
                   : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                  std::ceil(0.01 * double(poly.size())))));
  const double cc_magnitude =
      cfg.cc_magnitude ? *cfg.cc_magnitude
                       : (coupling_terms.empty() ? 0.0 : abs_sum / double(coupling_terms.size()));
  const double steady_tol = cfg.steady_tol ? *cfg.steady_tol : 1e-4 * cfg.x_sat;

  std::vector<double> imag(poly.size(), 0.0);
  std::vector<std::size_t> active;

  CounterRng rng(seed);
  std::vector<cplx> x(n, cplx{}), g(n), dx(n);
  std::vector<double> gain(n, -cfg.nu_D);
  std::vector<double> window(static_cast<std::size_t>(cfg.steady_window), 0.0);
  std::size_t window_fill = 0, window_pos = 0;
  double window_sum = 0.0;
  std::vector<cplx> others;

  Recorder rec(cfg);
  auto real_parts = [&] {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = x[i].real();
    return r;
  };
  rec.maybe(0, real_parts);

  for (int t = 0; t < cfg.steps; ++t) {
    std::fill(g.begin(), g.end(), cplx{});
    for (std::size_t k : coupling_terms) {
      const auto term = poly[k];
      const cplx c(coupling_sign * term.coeff, imag[k]);
      const auto& v = term.vars;
      const std::size_t d = v.size();
      for (std::size_t p = 0; p < d; ++p) {
        // Product over the other variables, conjugating the last of them.
        cplx prod = c;
        const std::size_t last = (p == d - 1) ? d - 2 : d - 1;
        for (std::size_t q = 0; q < d; ++q) {
          if (q == p) continue;
          prod *= (q == last) ? std::conj(x[v[q]]) : x[v[q]];
        }
        g[v[p]] += prod;
      }
    }
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::norm(x[i]);
      dx[i] = cfg.xi * (x[i] * (gain[i] - rho) + g[i]);
      if (cfg.sigma > 0.0) dx[i] += cfg.sigma * rng.normal();
      mean_abs += std::abs(dx[i]);
    }
    mean_abs /= double(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::norm(x[i]);
      gain[i] += cfg.xi * cfg.epsilon * (cfg.rho_th - rho);
      x[i] += dx[i];
      check_amplitude(std::abs(x[i]), limit, t, "tgdcc");
      if (!std::isfinite(gain[i])) throw DivergenceError("tgdcc gain diverged");
    }

    window_sum += mean_abs - window[window_pos];
    window[window_pos] = mean_abs;
    window_pos = (window_pos + 1) % window.size();
    window_fill = std::min(window_fill + 1, window.size());
    if (window_fill == window.size()) {
      const double avg = window_sum / double(window.size());
      const bool fire_on = active.empty() && avg < steady_tol && cc_count > 0 && cc_magnitude > 0.0;
      const bool fire_off = !active.empty() && avg > steady_tol;
      if (fire_on) {
        // Partial Fisher-Yates over the coupling terms.
        std::vector<std::size_t> pool = coupling_terms;
        for (std::size_t r = 0; r < cc_count; ++r) {
          const std::size_t pick = r + rng.below(pool.size() - r);
          std::swap(pool[r], pool[pick]);
          imag[pool[r]] = cc_magnitude;
          active.push_back(pool[r]);
        }
      } else if (fire_off) {
        for (std::size_t k : active) imag[k] = 0.0;
        active.clear();
      }
      if (fire_on || fire_off) {
        std::fill(window.begin(), window.end(), 0.0);
        window_fill = window_pos = 0;
        window_sum = 0.0;
      }
    }
    rec.maybe(t + 1, real_parts);
  }
  return finish(poly, real_parts(), seed, rec.take());
}

RunResult greedy_run(const PolySpec& poly, SpinVector start, GreedyStats* stats) {
  const std::size_t n = poly.n_vars();
  if (start.size() != n)
    throw Error("greedy start has " + std::to_string(start.size()) + " entries, expected " +
                std::to_string(n));
  for (Spin s : start)
    if (s != 1 && s != -1) throw Error("spin entries must be -1 or +1");
  std::vector<double> s(start.begin(), start.end());
  std::vector<double> g(n);
  gradient_unchecked(poly, s.data(), g.data());
  double energy = evaluate(poly, std::span<const Spin>(start));
  if (stats) {
    stats->moves = 0;
    stats->energies.assign(1, energy);
  }
  while (true) {
    std::size_t best = n;
    double best_delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = -2.0 * s[i] * g[i];
      if (delta < best_delta) {
        best_delta = delta;
        best = i;
      }
    }
    if (best == n) break;
    s[best] = -s[best];
    energy += best_delta;
    for (std::uint32_t tk : poly.terms_of(static_cast<Var>(best))) {
      const auto t = poly[tk];
      for (Var j : t.vars) {
        if (j == best) continue;
        double contrib = t.coeff;
        for (Var m : t.vars)
          if (m != j) contrib *= s[m];
        g[j] += 2.0 * contrib;
      }
    }
    if (stats) {
      ++stats->moves;
      stats->energies.push_back(energy);
    }
  }
  RunResult r;
  r.spins.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.spins[i] = s[i] < 0 ? Spin{-1} : Spin{1};
  r.energy = evaluate(poly, std::span<const Spin>(r.spins));
  return r;
}

SpinVector random_spins(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  SpinVector s(n);
  for (auto& v : s) v = rng.coin() ? Spin{-1} : Spin{1};
  return s;
}

RunResult solve_once(const PolySpec& poly, Algorithm a, const SolverConfig& cfg,
                     std::uint64_t seed) {
  switch (a) {
    case Algorithm::polysimcim: return polysimcim_run(poly, cfg, seed);
    case Algorithm::hopfield: return hopfield_run(poly, cfg, seed);
    case Algorithm::leleu: return leleu_run(poly, cfg, seed);
    case Algorithm::tgdcc: return tgdcc_run(poly, cfg, seed);
    case Algorithm::greedy: {
      auto r = greedy_run(poly, random_spins(poly.n_vars(), seed));
      r.seed = seed;
      return r;
    }
  }
  throw Error("unknown algorithm");
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t j) noexcept {
  return derive_seed(base_seed, j);
}

unsigned default_workers() {
  if (const char* env = std::getenv("POLYISING_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

BatchResult batch_solve(const PolySpec& poly, Algorithm a, const SolverConfig& cfg,
                        std::size_t runs, std::uint64_t base_seed, unsigned workers) {
  if (runs < 1) throw Error("runs must be >= 1");
  cfg.validate();
  if (a != Algorithm::greedy) require_nonempty(poly);
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, runs));

  std::vector<std::optional<RunResult>> slots(runs);
  std::vector<std::string> errors(runs);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next.fetch_add(1); j < runs; j = next.fetch_add(1)) {
      const std::uint64_t seed = run_seed(base_seed, j);
      try {
        RunResult r = solve_once(poly, a, cfg, seed);
        r.run_index = j;
        slots[j] = std::move(r);
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  BatchResult out;
  for (std::size_t j = 0; j < runs; ++j) {
    if (slots[j])
      out.runs.push_back(std::move(*slots[j]));
    else
      out.failures.push_back({j, run_seed(base_seed, j), errors[j]});
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryFrame>& frames) {
  out << "step,var_index,value\n";
  for (const auto& f : frames)
    for (std::size_t i = 0; i < f.x.size(); ++i)
      out << f.step << ',' << (i + 1) << ',' << format_real(f.x[i]) << '\n';
}

}  // namespace polyising
