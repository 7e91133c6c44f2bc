#ifndef CATMEM_CAT_SAMPLER_HPP
#define CATMEM_CAT_SAMPLER_HPP

#include "catmem/core_model.hpp"
#include "catmem/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace catmem {

/// Importance sampling of the cat's positive-P distribution with the
/// equal-probability proposal over its four delta-function terms.
struct SamplerConfig {
  CatParams cat;
  std::size_t n_samples = 4;
  std::uint64_t master_seed = 1;
  /// Exactly n/4 samples per branch when set; multinomial draws otherwise.
  bool stratified = true;

  void validate() const;
};

/// Weight carried by ++ and -- samples: 2/(1 + exp(-2|a0|^2)).
[[nodiscard]] double diagonal_weight(const CatParams& cat);
/// Weight carried by +- and -+ samples: 2 exp(-2|a0|^2)/(1 + exp(-2|a0|^2)).
[[nodiscard]] double offdiagonal_weight(const CatParams& cat);

[[nodiscard]] WeightedSample make_branch_sample(const CatParams& cat, Branch branch);

/// Stratified output is ordered in blocks: ++, --, +-, -+.
[[nodiscard]] std::vector<WeightedSample> sample_cat(const SamplerConfig& config);

/// Normally ordered thermal amplitudes: <|b|^2> = n, <b^2> = 0, b+ = conj(b).
[[nodiscard]] std::vector<std::pair<Complex, Complex>> sample_thermal(double n_occupation, std::size_t count,
                                                                      CounterStream& rng);

struct CatMoments {
  Complex mean_a;
  Complex mean_a2;
  Complex mean_adag_a;
  double mean_weight = 0.0;
};

/// Weighted normally ordered moments (1/N) sum w_i f(alpha_i, alpha_i^+).
[[nodiscard]] CatMoments verify_cat_moments(std::span<const WeightedSample> samples);

}  // namespace catmem

#endif  // CATMEM_CAT_SAMPLER_HPP
