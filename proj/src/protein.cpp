#include "polyising/protein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyising/error.hpp"
#include "polyising/text.hpp"

namespace polyising::protein {

std::string_view to_string(ContactModel m) noexcept {
  return m == ContactModel::HP ? "HP" : "MJ";
}

ContactModel parse_contact_model(std::string_view name) {
  if (name == "HP" || name == "hp") return ContactModel::HP;
  if (name == "MJ" || name == "mj") return ContactModel::MJ;
  throw Error("unknown contact model '" + std::string(name) + "' (expected HP or MJ)");
}

InteractionModel::InteractionModel(
    std::string alphabet, std::initializer_list<std::pair<std::string_view, double>> pairs)
    : alphabet_(std::move(alphabet)) {
  for (const auto& [p, e] : pairs) {
    const int a = p[0] - 'A', b = p[1] - 'A';
    table_[a][b] = table_[b][a] = e;
    max_abs_ = std::max(max_abs_, std::abs(e));
  }
}

const InteractionModel& InteractionModel::for_model(ContactModel m) {
  static const InteractionModel hp("HP", {{"HH", -1.0}, {"HP", 0.0}, {"PP", 0.0}});
  static const InteractionModel mj("PSVKMA", {{"PS", -0.5},
                                              {"PK", -1.0},
                                              {"PA", -2.0},
                                              {"SM", -3.0},
                                              {"VA", -4.0},
                                              {"VS", -5.0}});
  return m == ContactModel::HP ? hp : mj;
}

double InteractionModel::pair(char a, char b) const noexcept {
  if (a < 'A' || a > 'Z' || b < 'A' || b > 'Z') return 0.0;
  return table_[a - 'A'][b - 'A'];
}

void Sequence::validate() const {
  if (residues.size() < 2) throw Error("sequence needs at least 2 residues");
  const auto alphabet = InteractionModel::for_model(model).alphabet();
  for (char c : residues)
    if (alphabet.find(c) == std::string_view::npos)
      throw Error("residue '" + std::string(1, c) + "' is not in the " +
                  std::string(to_string(model)) + " alphabet '" + std::string(alphabet) + "'");
}

TurnBits parse_bits(std::string_view text) {
  TurnBits out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw Error("bit strings may contain only '0' and '1'");
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s;
  for (auto b : bits) s += b ? '1' : '0';
  return s;
}

namespace {

std::size_t prefix_length(std::size_t residues) {
  return std::min<std::size_t>(kFixedPrefix.size(), 2 * (residues - 1));
}

}  // namespace

std::size_t free_bit_count(std::size_t residues) {
  if (residues < 2) throw Error("a chain needs at least 2 residues");
  return 2 * (residues - 1) - prefix_length(residues);
}

TurnBits full_turn_bits(std::span<const std::uint8_t> free_bits, std::size_t residues) {
  if (free_bits.size() != free_bit_count(residues))
    throw Error("expected " + std::to_string(free_bit_count(residues)) + " free bits, got " +
                std::to_string(free_bits.size()));
  TurnBits out(kFixedPrefix.begin(), kFixedPrefix.begin() + prefix_length(residues));
  out.insert(out.end(), free_bits.begin(), free_bits.end());
  return out;
}

std::vector<Point> decode_turns(std::span<const std::uint8_t> turn_bits, std::size_t residues) {
  if (residues < 1 || turn_bits.size() != 2 * (residues - 1))
    throw Error("expected " + std::to_string(residues < 1 ? 0 : 2 * (residues - 1)) +
                " turn bits for " + std::to_string(residues) + " residues, got " +
                std::to_string(turn_bits.size()));
  std::vector<Point> coords;
  coords.reserve(residues);
  coords.push_back({0, 0});
  for (std::size_t k = 0; k + 1 < residues; ++k) {
    const int hi = turn_bits[2 * k], lo = turn_bits[2 * k + 1];
    Point p = coords.back();
    if (hi == 0 && lo == 1) ++p.x;        // right
    else if (hi == 1 && lo == 1) ++p.y;   // up
    else if (hi == 1 && lo == 0) --p.x;   // left
    else --p.y;                           // down
    coords.push_back(p);
  }
  return coords;
}

FoldEnergy fold_energy(const Sequence& seq, std::span<const Point> coords, double overlap_penalty) {
  const std::size_t m = seq.length();
  if (coords.size() != m)
    throw Error("fold has " + std::to_string(coords.size()) + " points for " + std::to_string(m) +
                " residues");
  const auto& model = InteractionModel::for_model(seq.model);
  FoldEnergy out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const int dist = std::abs(coords[i].x - coords[j].x) + std::abs(coords[i].y - coords[j].y);
      if (dist == 0) {
        ++out.overlaps;
        out.energy += overlap_penalty;
      } else if (dist == 1 && j - i >= 3) {
        ++out.contacts;
        out.energy += model.pair(seq.residues[i], seq.residues[j]);
      }
    }
  out.feasible = out.overlaps == 0;
  return out;
}

double default_overlap_penalty(const Sequence& seq) {
  return 1.0 + double(seq.length()) * InteractionModel::for_model(seq.model).max_abs();
}

LatticeFold brute_force_fold(const Sequence& seq, std::size_t max_residues) {
  seq.validate();
  const std::size_t m = seq.length();
  if (m > max_residues)
    throw Error("brute force limited to " + std::to_string(max_residues) + " residues");
  const std::size_t nfree = free_bit_count(m);
  LatticeFold best;
  best.energy = std::numeric_limits<double>::infinity();
  TurnBits free(nfree);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << nfree); ++v) {
    for (std::size_t k = 0; k < nfree; ++k)
      free[k] = static_cast<std::uint8_t>(v >> (nfree - 1 - k) & 1U);
    auto bits = full_turn_bits(free, m);
    auto coords = decode_turns(bits, m);
    const auto e = fold_energy(seq, coords, 0.0);
    if (!e.feasible || !(e.energy < best.energy)) continue;
    best = {std::move(bits), std::move(coords), e.energy, true};
  }
  if (!best.feasible) throw Error("no feasible fold");
  return best;
}

namespace {

long mod2(long v) { return ((v % 2) + 2) % 2; }

// ceil(log2(v)) for v >= 1, exactly.
long ceil_log2(long v) {
  long k = 0;
  while ((1L << k) < v) ++k;
  return k;
}

}  // namespace

BitCounts bit_counts(long m) {
  if (m < 4) throw Error("bit counts need M >= 4");
  BitCounts c;
  c.n_phys = 2 * m - 5;
  // Penalty sum starts at i = 1; a lower bound of 4 would give N_PUBO = 11
  // for M = 6 instead of 19.
  for (long i = 1; i <= m - 4; ++i)
    for (long j = i + 4; j <= m; ++j) c.n_penalty += ceil_log2((i - j) * (i - j)) * mod2(1 + i - j);
  for (long i = 1; i <= m - 3; ++i)
    for (long j = i + 3; j <= m; ++j) c.n_pair += mod2(i - j);
  for (long i = 1; i <= 2 * m - 7; ++i)
    for (long j = i + 2; j <= 2 * m - 5; ++j) c.n_reduction += mod2(i - j + 1);
  c.n_pubo = c.n_phys + c.n_penalty + c.n_pair;
  c.n_qubo = c.n_pubo + c.n_reduction;
  return c;
}

PolySpec build_fold_pubo(const Sequence& seq, std::optional<double> overlap_penalty,
                         std::size_t max_free_bits) {
  seq.validate();
  const std::size_t m = seq.length();
  const std::size_t nfree = free_bit_count(m);
  if (nfree > max_free_bits)
    throw Error("fold PUBO over " + std::to_string(nfree) + " free bits exceeds limit " +
                std::to_string(max_free_bits));
  const double lambda = overlap_penalty.value_or(default_overlap_penalty(seq));
  std::vector<double> table(std::size_t{1} << nfree);
  TurnBits free(nfree);
  for (std::size_t mask = 0; mask < table.size(); ++mask) {
    for (std::size_t k = 0; k < nfree; ++k) free[k] = static_cast<std::uint8_t>(mask >> k & 1U);
    const auto coords = decode_turns(full_turn_bits(free, m), m);
    table[mask] = fold_energy(seq, coords, lambda).energy;
  }
  return expand_table(table, nfree, ExpandOptions{max_free_bits, 1e-12});
}

LatticeFold fold_from_spins(const Sequence& seq, std::span<const Spin> spins,
                            std::optional<double> overlap_penalty) {
  const std::size_t m = seq.length();
  TurnBits free(spins.size());
  for (std::size_t k = 0; k < spins.size(); ++k) free[k] = spins[k] < 0 ? 1 : 0;
  LatticeFold f;
  f.turn_bits = full_turn_bits(free, m);
  f.coords = decode_turns(f.turn_bits, m);
  const auto e = fold_energy(seq, f.coords, overlap_penalty.value_or(default_overlap_penalty(seq)));
  f.energy = e.energy;
  f.feasible = e.feasible;
  return f;
}

std::string fold_csv(const Sequence& seq, const LatticeFold& fold) {
  std::string out = "index,residue,x,y\n";
  for (std::size_t i = 0; i < fold.coords.size(); ++i)
    out += std::to_string(i + 1) + "," + std::string(1, seq.residues[i]) + "," +
           std::to_string(fold.coords[i].x) + "," + std::to_string(fold.coords[i].y) + "\n";
  return out;
}

}  // namespace polyising::protein
