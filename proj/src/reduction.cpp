#include "polyising/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polyising/error.hpp"

namespace polyising {

namespace {

using Accumulator = std::map<std::vector<Var>, double>;

PolySpec from_accumulator(std::size_t n_vars, const Accumulator& acc) {
  std::vector<Term> terms;
  terms.reserve(acc.size());
  for (const auto& [vars, c] : acc)
    if (c != 0.0) terms.push_back({vars, c});
  return PolySpec(n_vars, std::move(terms));
}

constexpr std::size_t kMaxSubstitutionDegree = 30;

// Expands c * prod_{v in vars} (offset + slope * y_v) into the accumulator.
void expand_affine(Accumulator& acc, std::span<const Var> vars, double c, double offset,
                   double slope) {
  const std::size_t d = vars.size();
  if (d > kMaxSubstitutionDegree)
    throw Error("term of degree " + std::to_string(d) + " is too large to change variables");
  std::vector<Var> subset;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
    subset.clear();
    double coeff = c;
    for (std::size_t i = 0; i < d; ++i) {
      if (m >> i & 1U) {
        subset.push_back(vars[i]);
        coeff *= slope;
      } else {
        coeff *= offset;
      }
    }
    acc[subset] += coeff;
  }
}

}  // namespace

double evaluate_boolean(const PolySpec& poly, std::span<const std::uint8_t> bits) {
  if (bits.size() != poly.n_vars())
    throw Error("dimension mismatch: point has " + std::to_string(bits.size()) +
                " entries, polynomial has " + std::to_string(poly.n_vars()) + " variables");
  for (auto b : bits)
    if (b > 1) throw Error("boolean entries must be 0 or 1");
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto t = poly[k];
    bool on = true;
    for (Var v : t.vars) on = on && bits[v] != 0;
    if (on) sum += t.coeff;
  }
  return sum;
}

PolySpec spin_to_boolean(const PolySpec& spin_poly) {
  Accumulator acc;
  for (std::size_t k = 0; k < spin_poly.size(); ++k) {
    const auto t = spin_poly[k];
    expand_affine(acc, t.vars, t.coeff, 1.0, -2.0);
  }
  return from_accumulator(spin_poly.n_vars(), acc);
}

PolySpec boolean_to_spin(const PolySpec& bool_poly) {
  Accumulator acc;
  for (std::size_t k = 0; k < bool_poly.size(); ++k) {
    const auto t = bool_poly[k];
    expand_affine(acc, t.vars, t.coeff, 0.5, -0.5);
  }
  return from_accumulator(bool_poly.n_vars(), acc);
}

std::vector<std::uint8_t> ReductionMap::lift(std::span<const std::uint8_t> original_bits) const {
  if (original_bits.size() != original_n)
    throw Error("lift expects " + std::to_string(original_n) + " original bits");
  std::vector<std::uint8_t> out(reduced_n, 0);
  std::copy(original_bits.begin(), original_bits.end(), out.begin());
  for (const auto& a : ancilla_defs)
    out[a.ancilla] = static_cast<std::uint8_t>(out[a.parents.first] & out[a.parents.second]);
  return out;
}

Quadratized quadratize(const PolySpec& bool_poly, const QuadratizeOptions& options) {
  const double weight = options.penalty_weight.value_or(1.0 + bool_poly.abs_coeff_sum());
  if (!(weight > 0.0) || !std::isfinite(weight)) throw Error("penalty weight must be positive");

  Quadratized out;
  out.map.original_n = bool_poly.n_vars();
  out.map.penalty_weight = weight;
  if (bool_poly.degree() <= 2) {
    out.poly = bool_poly;
    out.map.reduced_n = bool_poly.n_vars();
    return out;
  }

  Accumulator acc;
  for (std::size_t k = 0; k < bool_poly.size(); ++k) {
    const auto t = bool_poly[k];
    acc[std::vector<Var>(t.vars.begin(), t.vars.end())] += t.coeff;
  }
  auto next_var = static_cast<Var>(bool_poly.n_vars());

  while (true) {
    std::map<std::pair<Var, Var>, std::size_t> pair_counts;
    for (const auto& [vars, c] : acc) {
      if (vars.size() < 3 || c == 0.0) continue;
      for (std::size_t a = 0; a < vars.size(); ++a)
        for (std::size_t b = a + 1; b < vars.size(); ++b) ++pair_counts[{vars[a], vars[b]}];
    }
    if (pair_counts.empty()) break;
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
      if (it->second > best->second) best = it;
    const auto [pi, pj] = best->first;
    const Var anc = next_var++;

    Accumulator next;
    for (auto& [vars, c] : acc) {
      if (c == 0.0) continue;
      const bool hit = vars.size() >= 3 && std::binary_search(vars.begin(), vars.end(), pi) &&
                       std::binary_search(vars.begin(), vars.end(), pj);
      if (!hit) {
        next[vars] += c;
        continue;
      }
      std::vector<Var> reduced;
      reduced.reserve(vars.size() - 1);
      for (Var v : vars)
        if (v != pi && v != pj) reduced.push_back(v);
      reduced.push_back(anc);  // ancillas have the largest index so far
      next[reduced] += c;
    }
    next[{pi, pj}] += weight;
    next[{pi, anc}] += -2.0 * weight;
    next[{pj, anc}] += -2.0 * weight;
    next[{anc}] += 3.0 * weight;
    acc = std::move(next);
    out.map.ancilla_defs.push_back({anc, {pi, pj}});
  }
  out.map.reduced_n = next_var;
  out.poly = from_accumulator(next_var, acc);
  return out;
}

SpinQubo quadratize_spin(const PolySpec& spin_poly, double rel_tol,
                         const QuadratizeOptions& options) {
  auto q = quadratize(spin_to_boolean(spin_poly), options);
  PolySpec spin = boolean_to_spin(q.poly);
  double scale = 0.0;
  for (double c : spin.coeffs()) scale = std::max(scale, std::abs(c));
  return {prune(spin, rel_tol * scale), std::move(q.map)};
}

OverheadReport overhead_report(const PolySpec& spin_poly) {
  const auto q = quadratize_spin(spin_poly);
  return {spin_poly.n_vars(), spin_poly.size(), q.poly.n_vars(), q.poly.size()};
}

std::string overhead_csv(std::span<const OverheadReport> rows) {
  std::string out = "n_vars,terms_pubo,n_vars_qubo,terms_qubo\n";
  for (const auto& r : rows)
    out += std::to_string(r.n_before) + "," + std::to_string(r.terms_before) + "," +
           std::to_string(r.n_after) + "," + std::to_string(r.terms_after) + "\n";
  return out;
}

}  // namespace polyising
