#include <cmath>
#include <vector>

#include "doctest.h"
#include "polyising/error.hpp"
#include "polyising/instances.hpp"
#include "polyising/reduction.hpp"
#include "polyising/rng.hpp"
#include "test_util.hpp"

using namespace polyising;

namespace {

std::vector<std::uint8_t> bits_of(std::uint64_t m, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(m >> i & 1U);
  return b;
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("s1 becomes 1 - 2 b1") {
  const auto b = spin_to_boolean(PolySpec(1, {{{0}, 1.0}}));
  REQUIRE(b.size() == 2);
  CHECK(b[0].degree() == 0);
  CHECK(b[0].coeff == 1.0);
  CHECK(b[1].coeff == -2.0);
}

TEST_CASE("spin and boolean forms agree pointwise") {
  CounterRng rng(3);
  for (std::size_t n : {4, 8, 12}) {
    const auto p = testutil::random_poly(n, 4, 3 * n, rng);
    const auto b = spin_to_boolean(p);
    for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
      const auto s = spins_from_mask(m, n);  // bit set means s = -1, i.e. b = 1
      const auto x = bits_of(m, n);
      CHECK(evaluate_boolean(b, x) ==
            doctest::Approx(evaluate(p, std::span<const Spin>(s))).epsilon(1e-12));
    }
  }
}

TEST_CASE("round trip on Class II N=10") {
  const auto p = generate({InstanceClass::II, 10, 8, 0.9});
  const auto back = boolean_to_spin(spin_to_boolean(p));
  // Lower-order residues are sums that cancel only up to rounding.
  const auto cleaned = prune(back, 1e-12);
  CHECK(cleaned.size() == p.size());
  CHECK(testutil::max_coeff_diff(cleaned, p) <= 1e-12);
}

TEST_CASE("single cubic term needs one ancilla and keeps its minima") {
  const PolySpec cubic(3, {{{0, 1, 2}, 1.0}});
  const auto q = quadratize(cubic);
  CHECK(q.map.ancilla_defs.size() == 1);
  CHECK(q.map.reduced_n == 4);
  CHECK(q.poly.degree() <= 2);

  double orig_min = INFINITY;
  for (std::uint64_t m = 0; m < 8; ++m) orig_min = std::min(orig_min, evaluate_boolean(cubic, bits_of(m, 3)));
  double red_min = INFINITY;
  for (std::uint64_t m = 0; m < 16; ++m) red_min = std::min(red_min, evaluate_boolean(q.poly, bits_of(m, 4)));
  CHECK(red_min == orig_min);
  for (std::uint64_t m = 0; m < 16; ++m) {
    const auto b = bits_of(m, 4);
    if (evaluate_boolean(q.poly, b) != red_min) continue;
    const std::vector<std::uint8_t> head(b.begin(), b.begin() + 3);
    CHECK(evaluate_boolean(cubic, head) == orig_min);
    CHECK(b[3] == (b[0] & b[1]));
  }
}

TEST_CASE("quadratic input is a fixed point") {
  const PolySpec p(3, {{{0, 1}, 2.0}, {{2}, -1.0}, {{}, 0.5}});
  const auto q = quadratize(p);
  CHECK(q.poly == p);
  CHECK(q.map.ancilla_defs.empty());
  CHECK(q.map.reduced_n == 3);
}

TEST_CASE("Class III N=12 keeps its minimum after reduction") {
  const auto p = generate({InstanceClass::III, 12, 31, 0.9});
  const auto sq = quadratize_spin(p);
  CHECK(sq.poly.degree() <= 2);
  REQUIRE(sq.poly.n_vars() <= 30);
  CHECK(exhaustive_minimum(sq.poly).energy ==
        doctest::Approx(exhaustive_minimum(p).energy).epsilon(1e-12));
}

TEST_CASE("map invariants and ancilla consistency at every reduced optimum") {
  CounterRng rng(71);
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t n = 5 + rep % 3;
    const auto p = spin_to_boolean(testutil::random_poly(n, 4, 5, rng));
    const auto q = quadratize(p);
    const auto& map = q.map;
    CHECK(map.reduced_n == map.original_n + map.ancilla_defs.size());
    for (const auto& a : map.ancilla_defs) {
      CHECK(a.parents.first < a.ancilla);
      CHECK(a.parents.second < a.ancilla);
    }
    REQUIRE(map.reduced_n <= 22);
    double best = INFINITY;
    for (std::uint64_t m = 0; m < (1ULL << map.reduced_n); ++m)
      best = std::min(best, evaluate_boolean(q.poly, bits_of(m, map.reduced_n)));
    double orig = INFINITY;
    for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
      const auto b = bits_of(m, n);
      orig = std::min(orig, evaluate_boolean(p, b));
      // Lifting is value-preserving everywhere, not just at optima.
      CHECK(evaluate_boolean(q.poly, map.lift(b)) == doctest::Approx(evaluate_boolean(p, b)));
    }
    CHECK(best == doctest::Approx(orig).epsilon(1e-12));
    for (std::uint64_t m = 0; m < (1ULL << map.reduced_n); ++m) {
      const auto b = bits_of(m, map.reduced_n);
      if (evaluate_boolean(q.poly, b) > best + 1e-9) continue;
      for (const auto& a : map.ancilla_defs)
        CHECK(b[a.ancilla] == (b[a.parents.first] & b[a.parents.second]));
    }
  }
}

TEST_CASE("pair choice is the most frequent, lowest pair on ties") {
  // (0,1) occurs in both cubic terms; (0,2) and friends only once.
  const PolySpec p(4, {{{0, 1, 2}, 1.0}, {{0, 1, 3}, 1.0}});
  const auto q = quadratize(p);
  REQUIRE(q.map.ancilla_defs.size() == 1);
  CHECK(q.map.ancilla_defs[0].parents == std::pair<Var, Var>{0, 1});
  const auto single = quadratize(PolySpec(4, {{{1, 2, 3}, 1.0}}));
  CHECK(single.map.ancilla_defs[0].parents == std::pair<Var, Var>{1, 2});
}

TEST_CASE("default penalty weight and override") {
  const PolySpec p(3, {{{0, 1, 2}, -2.0}, {{0}, 1.5}, {{}, 10.0}});
  CHECK(quadratize(p).map.penalty_weight == 1.0 + 3.5);  // constant excluded
  CHECK(quadratize(p, {7.0}).map.penalty_weight == 7.0);
  CHECK_THROWS_AS(quadratize(p, {-1.0}), Error);
}

TEST_CASE("overhead report") {
  const PolySpec quad(3, {{{0, 1}, 1.0}, {{1, 2}, -1.0}});
  const auto r = overhead_report(quad);
  CHECK(r.n_after == r.n_before);
  CHECK(r.terms_after == r.terms_before);

  const auto one = overhead_report(PolySpec(3, {{{0, 1, 2}, 1.0}}));
  CHECK(one.n_after == 4);

  const auto big = overhead_report(generate({InstanceClass::I, 20, 4, 0.9}));
  CHECK(big.n_before == 20);
  CHECK(big.terms_before == 1140);
  CHECK(big.terms_after >= big.terms_before);

  const std::vector<OverheadReport> rows{one};
  CHECK(overhead_csv(rows) ==
        "n_vars,terms_pubo,n_vars_qubo,terms_qubo\n3,1,4," + std::to_string(one.terms_after) + "\n");
}

}  // TEST_SUITE
