#pragma once

// Two-dimensional square-lattice protein folding with the turn encoding
//   01 -> right, 11 -> up, 10 -> left, 00 -> down
// (two bits per turn, leftmost bit first). The first three bits are fixed to
// 0,1,0: the first turn is "right" and the second turn is "right" or "down".
// Every fold is a rotation or reflection of one with that prefix.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyising/poly.hpp"

namespace polyising::protein {

enum class ContactModel { HP, MJ };

std::string_view to_string(ContactModel m) noexcept;
ContactModel parse_contact_model(std::string_view name);

/// Symmetric residue-pair contact energies; pairs not listed are 0.
class InteractionModel {
 public:
  static const InteractionModel& for_model(ContactModel m);

  double pair(char a, char b) const noexcept;
  /// Largest |pair energy| over listed pairs.
  double max_abs() const noexcept { return max_abs_; }
  std::string_view alphabet() const noexcept { return alphabet_; }

 private:
  InteractionModel(std::string alphabet, std::initializer_list<std::pair<std::string_view, double>> pairs);

  std::string alphabet_;
  std::array<std::array<double, 26>, 26> table_{};
  double max_abs_ = 0.0;
};

struct Sequence {
  std::string residues;
  ContactModel model = ContactModel::HP;

  /// Throws on letters outside the model's alphabet or length < 2.
  void validate() const;
  std::size_t length() const noexcept { return residues.size(); }
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

using TurnBits = std::vector<std::uint8_t>;

inline constexpr std::array<std::uint8_t, 3> kFixedPrefix{0, 1, 0};

/// Parses a string of '0'/'1' characters.
TurnBits parse_bits(std::string_view text);
std::string bits_to_string(std::span<const std::uint8_t> bits);

/// Number of free bits for an M-residue chain (2M - 5 for M >= 3).
std::size_t free_bit_count(std::size_t residues);

/// Fixed prefix followed by `free_bits`.
TurnBits full_turn_bits(std::span<const std::uint8_t> free_bits, std::size_t residues);

/// Lattice path starting at (0, 0). Requires 2(M - 1) bits.
std::vector<Point> decode_turns(std::span<const std::uint8_t> turn_bits, std::size_t residues);

struct FoldEnergy {
  double energy = 0.0;
  bool feasible = true;
  std::size_t contacts = 0;  // non-bonded unit-distance pairs with |i - j| >= 3
  std::size_t overlaps = 0;  // coinciding coordinate pairs
};

/// Contact energy plus `overlap_penalty` per coinciding pair.
FoldEnergy fold_energy(const Sequence& seq, std::span<const Point> coords, double overlap_penalty);

/// 1 + M * max|pair energy|.
double default_overlap_penalty(const Sequence& seq);

struct LatticeFold {
  TurnBits turn_bits;
  std::vector<Point> coords;
  double energy = 0.0;
  bool feasible = false;
};

/// Exhaustive search over the free bits. Infeasible folds are skipped; ties
/// keep the smallest free-bit string read as a binary number (first bit most
/// significant).
LatticeFold brute_force_fold(const Sequence& seq, std::size_t max_residues = 12);

struct BitCounts {
  long n_phys = 0;
  long n_penalty = 0;
  long n_pair = 0;
  long n_reduction = 0;
  long n_pubo = 0;
  long n_qubo = 0;
};

/// Bit counts of the turn-ancilla encoding with ancilla-based QUBO reduction.
BitCounts bit_counts(long residues);

/// Exact PUBO over the free bits: spin variable k is free bit k with
/// b = (1 - s) / 2. Its value at every spin point is the fold energy
/// (overlap penalty included) of the decoded fold.
PolySpec build_fold_pubo(const Sequence& seq, std::optional<double> overlap_penalty = {},
                         std::size_t max_free_bits = 20);

/// Decodes a spin assignment of the fold PUBO.
LatticeFold fold_from_spins(const Sequence& seq, std::span<const Spin> spins,
                            std::optional<double> overlap_penalty = {});

/// CSV "index,residue,x,y".
std::string fold_csv(const Sequence& seq, const LatticeFold& fold);

}  // namespace polyising::protein
