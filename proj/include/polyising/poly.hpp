#pragma once

// Sparse multilinear polynomials over spin variables:
//
//   H(s) = sum_T  c_T * prod_{i in T} s_i,   s in {-1, +1}^N
//
// Variables are 0-based in the C++ API. The PUBO text format is 1-based.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polyising {

using Var = std::uint32_t;
using Spin = std::int8_t;
using SpinVector = std::vector<Spin>;

struct Term {
  std::vector<Var> vars;
  double coeff = 0.0;

  friend bool operator==(const Term&, const Term&) = default;
};

struct TermView {
  std::span<const Var> vars;
  double coeff;

  std::size_t degree() const noexcept { return vars.size(); }
};

/// Immutable sparse polynomial. Construction sorts each term's variables,
/// orders terms lexicographically, merges duplicates by exact addition and
/// drops terms whose merged coefficient is exactly zero.
class PolySpec {
 public:
  PolySpec() = default;
  PolySpec(std::size_t n_vars, std::vector<Term> terms);

  std::size_t n_vars() const noexcept { return n_vars_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  bool empty() const noexcept { return coeffs_.empty(); }

  TermView operator[](std::size_t k) const noexcept {
    return {std::span<const Var>(vars_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]),
            coeffs_[k]};
  }

  /// Largest term degree (0 for a constant or empty polynomial).
  std::size_t degree() const noexcept { return degree_; }

  /// Coefficient of the degree-0 term, 0 if absent.
  double constant() const noexcept;

  /// Sum of |coeff| over terms of degree >= 1.
  double abs_coeff_sum() const noexcept;

  std::span<const double> coeffs() const noexcept { return coeffs_; }

  /// Indices of the terms containing variable `v`, ascending.
  std::span<const std::uint32_t> terms_of(Var v) const noexcept {
    return std::span<const std::uint32_t>(incidence_).subspan(
        incidence_offsets_[v], incidence_offsets_[v + 1] - incidence_offsets_[v]);
  }

  std::vector<Term> terms() const;

  friend bool operator==(const PolySpec& a, const PolySpec& b) {
    return a.n_vars_ == b.n_vars_ && a.offsets_ == b.offsets_ && a.vars_ == b.vars_ &&
           a.coeffs_ == b.coeffs_;
  }

 private:
  std::size_t n_vars_ = 0;
  std::size_t degree_ = 0;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<Var> vars_;
  std::vector<double> coeffs_;
  std::vector<std::uint32_t> incidence_offsets_{0};
  std::vector<std::uint32_t> incidence_;
};

/// Multilinear extension evaluated at a real point.
double evaluate(const PolySpec& poly, std::span<const double> point);

/// Energy at a spin point; entries must be -1 or +1.
double evaluate(const PolySpec& poly, std::span<const Spin> spins);

/// Partial derivatives of the multilinear extension at `x`, written to `out`.
/// Leave-one-out products use prefix/suffix sweeps, so zero amplitudes are fine.
void gradient(const PolySpec& poly, std::span<const double> x, std::span<double> out);
std::vector<double> gradient(const PolySpec& poly, std::span<const double> x);

/// Same as gradient() without argument validation. For solver inner loops.
void gradient_unchecked(const PolySpec& poly, const double* x, double* out) noexcept;

struct ExpandOptions {
  std::size_t max_vars = 20;
  double drop_tol = 1e-12;
};

/// Walsh-Hadamard expansion of a value table. Entry `mask` holds f at the
/// point with s_i = -1 exactly where bit i of `mask` is set.
PolySpec expand_table(std::span<const double> values, std::size_t n_vars,
                      const ExpandOptions& options = {});

/// Exact multilinear polynomial agreeing with `f` on all 2^n spin points.
PolySpec multilinear_expand(const std::function<double(std::span<const Spin>)>& f,
                            std::size_t n_vars, const ExpandOptions& options = {});

/// Spin point encoded by `mask` (bit i set -> s_i = -1).
SpinVector spins_from_mask(std::uint64_t mask, std::size_t n_vars);

struct ExhaustiveResult {
  double energy = 0.0;
  SpinVector spins;
};

/// Global minimum by Gray-code enumeration of all 2^n spin points. Ties keep
/// the first point visited. The returned energy is recomputed from scratch.
ExhaustiveResult exhaustive_minimum(const PolySpec& poly, std::size_t max_vars = 30);

PolySpec parse_pubo(std::string_view text);
PolySpec read_pubo(const std::filesystem::path& path);

/// `comment` lines (may be multi-line) are emitted first, each prefixed "# ".
std::string serialize_pubo(const PolySpec& poly, std::string_view comment = {});
void write_pubo(const std::filesystem::path& path, const PolySpec& poly,
                std::string_view comment = {});

/// Copy of `poly` without terms whose |coeff| <= tol.
PolySpec prune(const PolySpec& poly, double tol);

}  // namespace polyising
