#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "polyising/error.hpp"
#include "polyising/harness.hpp"
#include "polyising/instances.hpp"
#include "polyising/rng.hpp"

using namespace polyising;

namespace {

InstanceResult make_instance(std::size_t n, std::size_t index,
                             std::vector<std::pair<Algorithm, std::vector<double>>> runs,
                             std::optional<double> oracle = {}) {
  InstanceResult r;
  r.recipe = {InstanceClass::I, n, 1000 + index, 0.9};
  r.index = index;
  r.oracle = oracle;
  for (auto& [a, e] : runs) {
    AlgorithmRuns ar;
    ar.algorithm = a;
    ar.energies = std::move(e);
    r.algorithms.push_back(std::move(ar));
  }
  return r;
}

BenchmarkOptions tiny_options() {
  BenchmarkOptions o;
  o.classes = {InstanceClass::I, InstanceClass::III};
  o.sizes = {8, 9};
  o.instances = 2;
  o.runs = 12;
  o.steps = 150;
  o.seed = 5;
  o.tune_budget = 12;
  o.tune_runs = 4;
  o.drop_prob = 0.5;
  return o;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("eta") {
  CHECK(eta(-90, -100) == doctest::Approx(0.9));
  CHECK(eta(-100, -100) == 1.0);
  CHECK(eta(50, -100) == -0.5);
  CHECK_THROWS_AS(eta(-1, 0), Error);
  CHECK_THROWS_AS(eta(-1, 2), Error);
}

TEST_CASE("best known energy") {
  const std::vector<double> e{-3, -5, 2};
  CHECK(best_known(e).energy == -5);
  CHECK(best_known(e).reached);
  const std::vector<double> f{-5};
  const auto b = best_known(f, -6.0);
  CHECK(b.energy == -6);
  CHECK_FALSE(b.reached);
  CHECK(best_known(f).energy == -5);
  CHECK(best_known(f, -5.0).reached);
}

TEST_CASE("quantiles by hand") {
  // Sorted {1, 2, 3, 4, 10}: positions p * 4.
  const std::vector<double> v{10, 3, 1, 4, 2};
  CHECK(quantile(v, 0.25) == 2.0);
  CHECK(quantile(v, 0.5) == 3.0);
  CHECK(quantile(v, 0.75) == 4.0);
  CHECK(quantile(v, 0.9) == doctest::Approx(4.0 + 0.6 * 6.0));
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 10.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("per-instance best and median eta") {
  auto rep = aggregate({make_instance(10, 0, {{Algorithm::polysimcim, {-2.0, -10.0}}})});
  const auto& a = rep.instances[0].algorithms[0];
  CHECK(a.etas == std::vector<double>{0.2, 1.0});
  CHECK(a.best_eta == 1.0);
  CHECK(a.median_eta == doctest::Approx(0.6));
}

TEST_CASE("median of per-instance maxima across instances") {
  // Oracle -10 pins best_known so the maxima are 1.0, 0.8 and 0.9.
  auto rep = aggregate({make_instance(10, 0, {{Algorithm::greedy, {-10.0, -5.0}}}, -10.0),
                        make_instance(10, 1, {{Algorithm::greedy, {-8.0}}}, -10.0),
                        make_instance(10, 2, {{Algorithm::greedy, {-9.0, -1.0}}}, -10.0)});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].instances == 3);
  CHECK(rep.rows[0].best_eta.median == doctest::Approx(0.9));
  CHECK(rep.rows[0].best_eta.p25 == doctest::Approx(0.85));
  CHECK(rep.rows[0].best_eta.p75 == doctest::Approx(0.95));
  CHECK_FALSE(rep.instances[1].reached);
}

TEST_CASE("eta is shared per instance and bounded by one") {
  auto rep = aggregate({make_instance(
      12, 0, {{Algorithm::polysimcim, {-4.0, -7.0}}, {Algorithm::greedy, {-6.0, 3.0}}})});
  const auto& inst = rep.instances[0];
  CHECK(inst.best_known == -7.0);
  CHECK(inst.reached);
  for (const auto& a : inst.algorithms)
    for (double e : a.etas) CHECK(e <= 1.0);
  CHECK(inst.algorithms[0].etas[1] == 1.0);
  CHECK(inst.algorithms[1].etas[1] == doctest::Approx(-3.0 / 7.0));
}

TEST_CASE("instances without a negative reference carry no eta") {
  auto rep = aggregate({make_instance(10, 0, {{Algorithm::greedy, {1.0, 2.0}}}),
                        make_instance(10, 1, {{Algorithm::greedy, {}}})});
  CHECK_FALSE(rep.instances[0].eta_defined);
  CHECK_FALSE(rep.instances[1].eta_defined);
  CHECK(rep.rows.empty());
}

TEST_CASE("aggregation is permutation invariant") {
  std::vector<InstanceResult> base;
  CounterRng rng(4);
  for (std::size_t n : {10, 12})
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> a(7), b(5);
      for (auto& v : a) v = -rng.uniform(1, 20);
      for (auto& v : b) v = -rng.uniform(1, 20);
      base.push_back(make_instance(n, i, {{Algorithm::polysimcim, a}, {Algorithm::greedy, b}}));
    }
  auto shuffled = base;
  std::reverse(shuffled.begin(), shuffled.end());
  for (auto& inst : shuffled)
    for (auto& a : inst.algorithms) std::rotate(a.energies.begin(), a.energies.begin() + 2, a.energies.end());
  const auto j1 = to_json(aggregate(base));
  const auto j2 = to_json(aggregate(shuffled));
  CHECK(j1.at("aggregates") == j2.at("aggregates"));
  CHECK(j1.at("histograms") == j2.at("histograms"));
}

TEST_CASE("histograms cover the largest size with 0.01 bins") {
  auto rep = aggregate({make_instance(8, 0, {{Algorithm::greedy, {-1.0, -0.5}}}),
                        make_instance(16, 0, {{Algorithm::greedy, {-100.0, -95.0, -95.0}}})});
  REQUIRE(rep.histograms.size() == 1);
  const auto& h = rep.histograms[0];
  CHECK(h.size == 16);
  CHECK(h.first_bin == 95);
  REQUIRE(h.counts.size() == 6);
  CHECK(h.counts.front() == 2);
  CHECK(h.counts.back() == 1);
  const auto csv = histogram_csv(rep, InstanceClass::I);
  CHECK(csv.rfind("bin_lo,bin_hi,algorithm,count\n0.95,0.96,greedy,2\n", 0) == 0);
  // eta = 0.29 exactly on an edge lands in bin 29, not 28.
  auto edge = aggregate({make_instance(8, 0, {{Algorithm::greedy, {-100.0, -29.0}}})});
  CHECK(edge.histograms[0].first_bin == 29);
  CHECK(panel_csv(rep, InstanceClass::I, true).rfind("size,algorithm,median,p25,p75\n8,greedy,1,1,1\n", 0) == 0);
}

TEST_CASE("tune cost analytic values") {
  const std::vector<double> same{-4.0, -2.0};  // mean -3, min -4
  CHECK(tune_cost(same, -3.0, -4.0) == -1.25);
  const std::vector<double> worse{5.0, 7.0};
  CHECK(tune_cost(worse, -3.0, -4.0) == 1.25);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(tune_cost(zero, -3.0, -4.0) == 0.0);
  CHECK_THROWS_AS(tune_cost(same, 0.0, -4.0), Error);
  CHECK_THROWS_AS(tune_cost(same, -3.0, 0.0), Error);
}

TEST_CASE("tune cost never exceeds 1.25") {
  CounterRng rng(9);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> e(1 + rng.below(6));
    for (auto& v : e) v = rng.uniform(-100, 100);
    const double m0 = rng.uniform(-50, 50), n0 = rng.uniform(-50, 50);
    if (m0 == 0.0 || n0 == 0.0) continue;
    CHECK(tune_cost(e, m0, n0) <= 1.25);
  }
}

TEST_CASE("tuning search space") {
  CHECK(tune_space(Algorithm::greedy).empty());
  for (const auto& p : tune_space(Algorithm::polysimcim)) {
    CHECK(p.lo_log10 == -8.0);
    CHECK(p.hi_log10 == (p.name == "sigma" ? -0.1 : 3.0));
  }
}

TEST_CASE("budget 10 is the random phase only and is deterministic") {
  const auto p = generate({InstanceClass::I, 10, 3, 0.9});
  TuneOptions o;
  o.budget = 10;
  o.runs_per_eval = 4;
  o.seed = 77;
  o.base = default_config(Algorithm::polysimcim);
  o.base.steps = 200;
  const auto a = tune(p, Algorithm::polysimcim, o);
  CHECK(a.cost_history.size() == 10);
  CHECK(a.best_cost == *std::min_element(a.cost_history.begin(), a.cost_history.end()));
  CHECK(a.cost_history[0] == -1.25);  // the base config is its own reference
  const auto b = tune(p, Algorithm::polysimcim, o);
  CHECK(a.best == b.best);
  CHECK(a.cost_history == b.cost_history);
  o.budget = 9;
  CHECK_THROWS_AS(tune(p, Algorithm::polysimcim, o), Error);
}

TEST_CASE("longer tuning never loses to the base config") {
  const auto p = generate({InstanceClass::II, 10, 8, 0.9});
  TuneOptions o;
  o.budget = 30;
  o.runs_per_eval = 4;
  o.seed = 3;
  o.base = default_config(Algorithm::hopfield);
  o.base.steps = 200;
  const auto r = tune(p, Algorithm::hopfield, o);
  CHECK(r.cost_history.size() == 30);
  CHECK(r.best_cost <= r.cost_history[0]);
  for (double c : r.cost_history) CHECK(c <= 1.25);
}

TEST_CASE("tiny benchmark: structure, oracle and worker independence") {
  auto o = tiny_options();
  o.workers = 1;
  const auto serial = run_benchmark(o);
  o.workers = 3;
  const auto wide = run_benchmark(o);
  CHECK(to_json(serial).dump() == to_json(wide).dump());

  CHECK(serial.instances.size() == 2 * 2 * 2);
  CHECK(serial.configs.size() == 2 * 2 * 5);
  for (const auto& inst : serial.instances) {
    REQUIRE(inst.oracle.has_value());
    CHECK(inst.best_known <= *inst.oracle);
    CHECK(inst.algorithms.size() == 5);
    for (const auto& a : inst.algorithms) {
      CHECK(a.energies.size() + a.failures == o.runs);
      for (double e : a.energies) CHECK(e >= *inst.oracle);
    }
  }
  for (const auto& c : serial.configs)
    if (c.algorithm == Algorithm::greedy) CHECK_FALSE(c.cost.has_value());
}

TEST_CASE("report regeneration from raw energies is byte identical") {
  auto o = tiny_options();
  o.classes = {InstanceClass::II};
  o.tune = false;
  const auto rep = run_benchmark(o);
  const auto text = to_json(rep).dump(2);
  const auto again = to_json(report_from_json(nlohmann::json::parse(text))).dump(2);
  CHECK(text == again);
  CHECK_THROWS_AS(report_from_json(nlohmann::json{{"configs", 1}}), Error);
}

TEST_CASE("prior best energies tighten the reference") {
  auto o = tiny_options();
  o.classes = {InstanceClass::I};
  o.sizes = {8};
  o.instances = 1;
  o.tune = false;
  o.oracle_max_vars = 0;
  const auto seed = generate_suite(InstanceClass::I, {8}, 1, derive_seed(o.seed, 0))[0].recipe.seed;
  o.prior_best[seed] = -1000.0;
  const auto rep = run_benchmark(o);
  REQUIRE(rep.instances.size() == 1);
  CHECK_FALSE(rep.instances[0].oracle.has_value());
  CHECK(rep.instances[0].best_known == -1000.0);
  CHECK_FALSE(rep.instances[0].reached);
}

}  // TEST_SUITE
