#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polyising/poly.hpp"

namespace polyising {

// Boolean-form polynomials reuse PolySpec storage; their variables take
// values in {0, 1} and are evaluated with evaluate_boolean().

/// Value of a boolean-form polynomial; entries must be 0 or 1.
double evaluate_boolean(const PolySpec& poly, std::span<const std::uint8_t> bits);

/// Substitutes s_i = 1 - 2 b_i and expands.
PolySpec spin_to_boolean(const PolySpec& spin_poly);

/// Substitutes b_i = (1 - s_i) / 2 and expands.
PolySpec boolean_to_spin(const PolySpec& bool_poly);

struct AncillaDef {
  Var ancilla = 0;
  std::pair<Var, Var> parents;
};

struct ReductionMap {
  std::size_t original_n = 0;
  std::size_t reduced_n = 0;
  std::vector<AncillaDef> ancilla_defs;  // in creation order
  double penalty_weight = 0.0;

  /// Extends an assignment of the original variables with consistent ancillas.
  std::vector<std::uint8_t> lift(std::span<const std::uint8_t> original_bits) const;
};

struct QuadratizeOptions {
  /// Rosenberg penalty weight; default 1 + sum |non-constant coeffs|.
  std::optional<double> penalty_weight;
};

struct Quadratized {
  PolySpec poly;  // boolean form, degree <= 2
  ReductionMap map;
};

/// Rosenberg pair substitution. Each round replaces the most frequent pair
/// (ties: lexicographically smallest) across terms of degree >= 3 by a fresh
/// ancilla a and adds M * (b_i b_j - 2 b_i a - 2 b_j a + 3 a).
Quadratized quadratize(const PolySpec& bool_poly, const QuadratizeOptions& options = {});

struct OverheadReport {
  std::size_t n_before = 0;
  std::size_t terms_before = 0;
  std::size_t n_after = 0;
  std::size_t terms_after = 0;
};

/// Result of spin -> boolean -> quadratize -> spin.
struct SpinQubo {
  PolySpec poly;
  ReductionMap map;
};

/// Quadratized spin problem. Residues from floating-point round trips with
/// |coeff| <= rel_tol * max|coeff| are pruned.
SpinQubo quadratize_spin(const PolySpec& spin_poly, double rel_tol = 1e-12,
                         const QuadratizeOptions& options = {});

OverheadReport overhead_report(const PolySpec& spin_poly);

/// "n_vars,terms_pubo,n_vars_qubo,terms_qubo" header plus one row per report.
std::string overhead_csv(std::span<const OverheadReport> rows);

}  // namespace polyising
