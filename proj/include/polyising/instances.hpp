#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "polyising/poly.hpp"

namespace polyising {

/// I: couplings +-1 with equal probability. II: uniform on [-1, 1].
/// III: Class II with each coupling dropped with probability `drop_prob`.
enum class InstanceClass { I, II, III };

std::string_view to_string(InstanceClass c) noexcept;
InstanceClass parse_instance_class(std::string_view name);

struct InstanceRecipe {
  InstanceClass class_id = InstanceClass::I;
  std::size_t n_vars = 10;
  std::uint64_t seed = 0;
  double drop_prob = 0.9;

  void validate() const;
  /// One-line description used as the PUBO comment header.
  std::string describe() const;
};

/// Random cubic polynomial over all C(N,3) triples in lexicographic order.
/// Draws per triple: Class I one word (top bit is the sign); Class II one
/// uniform; Class III one uniform for the drop decision, then one uniform for
/// the value only if the coupling survives.
PolySpec generate(const InstanceRecipe& recipe);

struct SuiteEntry {
  InstanceRecipe recipe;
  std::size_t index = 0;  // position within its size
  PolySpec poly;
};

/// Seed of instance (size, index): base_seed ^ mix64(size << 32 | index).
std::uint64_t suite_seed(std::uint64_t base_seed, std::size_t size, std::size_t index) noexcept;

std::vector<SuiteEntry> generate_suite(InstanceClass class_id, const std::vector<std::size_t>& sizes,
                                       std::size_t instances_per_size, std::uint64_t base_seed,
                                       double drop_prob = 0.9);

}  // namespace polyising
