#include "polyising/instances.hpp"

#include "polyising/error.hpp"
#include "polyising/rng.hpp"
#include "polyising/text.hpp"

namespace polyising {

std::string_view to_string(InstanceClass c) noexcept {
  switch (c) {
    case InstanceClass::I: return "I";
    case InstanceClass::II: return "II";
    case InstanceClass::III: return "III";
  }
  return "?";
}

InstanceClass parse_instance_class(std::string_view name) {
  if (name == "I" || name == "1") return InstanceClass::I;
  if (name == "II" || name == "2") return InstanceClass::II;
  if (name == "III" || name == "3") return InstanceClass::III;
  throw Error("unknown instance class '" + std::string(name) + "' (expected I, II or III)");
}

void InstanceRecipe::validate() const {
  if (n_vars < 3) throw Error("instances need n_vars >= 3");
  if (!(drop_prob >= 0.0 && drop_prob < 1.0)) throw Error("drop_prob must lie in [0, 1)");
}

std::string InstanceRecipe::describe() const {
  std::string s = "class=" + std::string(to_string(class_id)) + " n=" + std::to_string(n_vars) +
                  " seed=" + std::to_string(seed);
  if (class_id == InstanceClass::III) s += " drop_prob=" + format_real(drop_prob);
  return s;
}

PolySpec generate(const InstanceRecipe& recipe) {
  recipe.validate();
  const auto n = static_cast<Var>(recipe.n_vars);
  CounterRng rng(recipe.seed);
  std::vector<Term> terms;
  terms.reserve(recipe.class_id == InstanceClass::III
                    ? std::size_t(0)
                    : std::size_t(n) * (n - 1) * (n - 2) / 6);
  for (Var i = 0; i < n; ++i)
    for (Var j = i + 1; j < n; ++j)
      for (Var k = j + 1; k < n; ++k) {
        double c = 0.0;
        switch (recipe.class_id) {
          case InstanceClass::I:
            c = rng.coin() ? 1.0 : -1.0;
            break;
          case InstanceClass::II:
            c = rng.uniform(-1.0, 1.0);
            break;
          case InstanceClass::III:
            if (rng.uniform() < recipe.drop_prob) continue;
            c = rng.uniform(-1.0, 1.0);
            break;
        }
        terms.push_back({{i, j, k}, c});
      }
  return PolySpec(recipe.n_vars, std::move(terms));
}

std::uint64_t suite_seed(std::uint64_t base_seed, std::size_t size, std::size_t index) noexcept {
  return base_seed ^ mix64((static_cast<std::uint64_t>(size) << 32) | (index & 0xffffffffULL));
}

std::vector<SuiteEntry> generate_suite(InstanceClass class_id, const std::vector<std::size_t>& sizes,
                                       std::size_t instances_per_size, std::uint64_t base_seed,
                                       double drop_prob) {
  if (sizes.empty()) throw Error("instance suite needs at least one size");
  std::vector<SuiteEntry> out;
  for (std::size_t size : sizes)
    for (std::size_t idx = 0; idx < instances_per_size; ++idx) {
      InstanceRecipe r{class_id, size, suite_seed(base_seed, size, idx), drop_prob};
      out.push_back({r, idx, generate(r)});
    }
  return out;
}

}  // namespace polyising
