#include <cmath>
#include <cstdlib>
#include <limits>

#include "doctest.h"
#include "polyising/error.hpp"
#include "polyising/protein.hpp"

using namespace polyising;
using namespace polyising::protein;

namespace {

// Minimum over every turn string, no prefix fixed at all.
double unrestricted_min(const Sequence& seq) {
  const std::size_t m = seq.length(), nbits = 2 * (m - 1);
  double best = std::numeric_limits<double>::infinity();
  TurnBits bits(nbits);
  for (std::uint64_t v = 0; v < (1ULL << nbits); ++v) {
    for (std::size_t k = 0; k < nbits; ++k) bits[k] = static_cast<std::uint8_t>(v >> k & 1U);
    const auto e = fold_energy(seq, decode_turns(bits, m), 0.0);
    if (e.feasible) best = std::min(best, e.energy);
  }
  return best;
}

}  // namespace

TEST_SUITE("protein") {

TEST_CASE("turn encoding") {
  CHECK(decode_turns(parse_bits("01"), 2) == std::vector<Point>{{0, 0}, {1, 0}});
  CHECK(decode_turns(parse_bits("11"), 2) == std::vector<Point>{{0, 0}, {0, 1}});
  CHECK(decode_turns(parse_bits("10"), 2) == std::vector<Point>{{0, 0}, {-1, 0}});
  CHECK(decode_turns(parse_bits("00"), 2) == std::vector<Point>{{0, 0}, {0, -1}});
  CHECK(decode_turns(parse_bits("0101"), 3) == std::vector<Point>{{0, 0}, {1, 0}, {2, 0}});
  CHECK_THROWS_AS(decode_turns(parse_bits("010"), 3), Error);
  CHECK_THROWS_AS(parse_bits("012"), Error);
}

TEST_CASE("every bit string decodes to a unit-step path") {
  for (std::uint64_t v = 0; v < 1024; ++v) {
    TurnBits bits(10);
    for (std::size_t k = 0; k < 10; ++k) bits[k] = static_cast<std::uint8_t>(v >> k & 1U);
    const auto c = decode_turns(bits, 6);
    REQUIRE(c.size() == 6);
    CHECK(c[0] == Point{0, 0});
    for (std::size_t i = 1; i < c.size(); ++i)
      CHECK(std::abs(c[i].x - c[i - 1].x) + std::abs(c[i].y - c[i - 1].y) == 1);
  }
}

TEST_CASE("contact energies") {
  const Sequence hhhh{"HHHH", ContactModel::HP};
  const auto straight = decode_turns(parse_bits("010101"), 4);
  const auto e0 = fold_energy(hhhh, straight, 10.0);
  CHECK(e0.energy == 0.0);
  CHECK(e0.feasible);

  const auto u = decode_turns(parse_bits("011110"), 4);
  const auto e1 = fold_energy(hhhh, u, 10.0);
  CHECK(e1.energy == -1.0);
  CHECK(e1.contacts == 1);

  const auto back = decode_turns(parse_bits("0110"), 3);
  const auto e2 = fold_energy(Sequence{"HHH", ContactModel::HP}, back, 10.0);
  CHECK_FALSE(e2.feasible);
  CHECK(e2.energy >= 10.0);
}

TEST_CASE("interaction table is symmetric and sparse") {
  const auto& mj = InteractionModel::for_model(ContactModel::MJ);
  CHECK(mj.pair('V', 'S') == -5.0);
  CHECK(mj.pair('S', 'V') == -5.0);
  CHECK(mj.pair('P', 'A') == -2.0);
  CHECK(mj.pair('K', 'M') == 0.0);
  CHECK(mj.max_abs() == 5.0);
  const auto& hp = InteractionModel::for_model(ContactModel::HP);
  CHECK(hp.pair('H', 'H') == -1.0);
  CHECK(hp.pair('H', 'P') == 0.0);
  CHECK_THROWS_AS((Sequence{"PSX", ContactModel::MJ}.validate()), Error);
  CHECK_THROWS_AS((Sequence{"HHA", ContactModel::HP}.validate()), Error);
}

TEST_CASE("ground states by enumeration") {
  CHECK(brute_force_fold({"PSVKMA", ContactModel::MJ}).energy == -6.0);
  CHECK(brute_force_fold({"PSVKMAP", ContactModel::MJ}).energy == -6.0);
  CHECK(brute_force_fold({"PHPPHPPHPPH", ContactModel::HP}).energy == -4.0);
}

TEST_CASE("PSVKMAPS has a fold at -10") {
  const Sequence seq{"PSVKMAPS", ContactModel::MJ};
  const auto witness = decode_turns(parse_bits("01001000010111"), 8);
  const auto e = fold_energy(seq, witness, 100.0);
  CHECK(e.feasible);
  CHECK(e.energy == -10.0);  // P0-K3, V2-A5, V2-S7
  CHECK(e.contacts == 3);
  const auto best = brute_force_fold(seq);
  CHECK(best.energy == -10.0);
  CHECK(unrestricted_min(seq) == -10.0);
}

TEST_CASE("the fixed prefix loses no ground state") {
  for (const char* s : {"HHPPHH", "HPHPPH", "HHHHHH", "PHHPHP", "HPPHPH"})
    CHECK(brute_force_fold({s, ContactModel::HP}).energy ==
          unrestricted_min({s, ContactModel::HP}));
  for (const char* s : {"PSVKMA", "AVSPKM", "VASMPS"})
    CHECK(brute_force_fold({s, ContactModel::MJ}).energy ==
          unrestricted_min({s, ContactModel::MJ}));
}

TEST_CASE("brute force returns a consistent witness") {
  const Sequence seq{"HPHPPHHPH", ContactModel::HP};
  const auto f = brute_force_fold(seq);
  CHECK(f.feasible);
  CHECK(f.turn_bits.size() == 16);
  CHECK(f.turn_bits[0] == kFixedPrefix[0]);
  CHECK(f.turn_bits[1] == kFixedPrefix[1]);
  CHECK(f.turn_bits[2] == kFixedPrefix[2]);
  CHECK(fold_energy(seq, f.coords, 0.0).energy == f.energy);
  CHECK_THROWS_AS(brute_force_fold({"HPHPPHHPHPHHP", ContactModel::HP}), Error);
}

TEST_CASE("bit counts") {
  const auto c6 = bit_counts(6);
  CHECK(c6.n_pubo == 19);
  CHECK(c6.n_qubo == 28);
  CHECK(bit_counts(7).n_pubo == 33);
  CHECK(bit_counts(7).n_qubo == 49);
  CHECK(bit_counts(8).n_pubo == 48);
  CHECK(bit_counts(8).n_qubo == 73);
  // M = 11 by hand: 17 + (7*4 + 5*6 + 3*6 + 1*7) + (8 + 6 + 4 + 2), reduction 64.
  const auto c11 = bit_counts(11);
  CHECK(c11.n_phys == 17);
  CHECK(c11.n_penalty == 83);
  CHECK(c11.n_pair == 20);
  CHECK(c11.n_reduction == 64);
  for (long m = 4; m <= 40; ++m) {
    const auto c = bit_counts(m);
    CHECK(c.n_phys == 2 * m - 5);
    CHECK(c.n_pubo == c.n_phys + c.n_penalty + c.n_pair);
    CHECK(c.n_qubo == c.n_pubo + c.n_reduction);
  }
  CHECK_THROWS_AS(bit_counts(3), Error);
}

TEST_CASE("free bit counts") {
  CHECK(free_bit_count(6) == 7);
  CHECK(free_bit_count(11) == 17);
  CHECK(free_bit_count(2) == 0);
}

TEST_CASE("fold PUBO reproduces the fold energy on every spin point") {
  for (const char* s : {"HHHH", "HPHPH", "HHPPHH", "PSVKMAP", "HPHHPPHPH"}) {
    const Sequence seq{s, s[0] == 'P' && s[1] == 'S' ? ContactModel::MJ : ContactModel::HP};
    const auto m = seq.length();
    const auto n = free_bit_count(m);
    const double lambda = default_overlap_penalty(seq);
    const auto p = build_fold_pubo(seq);
    REQUIRE(p.n_vars() == n);
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
      const auto spins = spins_from_mask(mask, n);
      const auto f = fold_from_spins(seq, spins, lambda);
      CHECK(evaluate(p, std::span<const Spin>(spins)) == doctest::Approx(f.energy).epsilon(1e-9));
    }
  }
}

TEST_CASE("fold PUBO minimum equals the enumeration minimum") {
  const Sequence hhhh{"HHHH", ContactModel::HP};
  CHECK(exhaustive_minimum(build_fold_pubo(hhhh)).energy ==
        doctest::Approx(brute_force_fold(hhhh).energy));
  const Sequence psv{"PSVKMA", ContactModel::MJ};
  const auto p = build_fold_pubo(psv);
  CHECK(p.n_vars() == 7);
  CHECK(exhaustive_minimum(p).energy == doctest::Approx(-6.0).epsilon(1e-12));
}

TEST_CASE("doubling the overlap penalty keeps the optimum") {
  const Sequence seq{"PSVKMAP", ContactModel::MJ};
  const double lambda = default_overlap_penalty(seq);
  const auto a = exhaustive_minimum(build_fold_pubo(seq, lambda));
  const auto b = exhaustive_minimum(build_fold_pubo(seq, 2 * lambda));
  CHECK(a.energy == doctest::Approx(b.energy).epsilon(1e-12));
  CHECK(a.spins == b.spins);
}

TEST_CASE("PUBO size limit") {
  CHECK_THROWS_AS(build_fold_pubo({"HPHPHPHPHPHPH", ContactModel::HP}), Error);
}

TEST_CASE("fold CSV") {
  const Sequence seq{"HPH", ContactModel::HP};
  LatticeFold f;
  f.coords = decode_turns(parse_bits("0111"), 3);
  CHECK(fold_csv(seq, f) == "index,residue,x,y\n1,H,0,0\n2,P,1,0\n3,H,1,1\n");
}

}  // TEST_SUITE
