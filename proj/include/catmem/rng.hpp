#ifndef CATMEM_RNG_HPP
#define CATMEM_RNG_HPP

#include "catmem/core_model.hpp"

#include <cstdint>
#include <limits>
#include <random>

namespace catmem {

/// Counter-based generator: the k-th output is a SplitMix64 finalizer applied
/// to key + k * golden-gamma. A stream is fully determined by (master seed,
/// stream index), so trajectories draw the same numbers regardless of which
/// worker runs them.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key_(mix(master_seed ^ mix(stream_index + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  double normal() { return gauss_(*this); }

  /// Complex Gaussian with <|z|^2> = 1 and <z^2> = 0.
  Complex complex_normal() {
    constexpr double kHalfRoot = 0.70710678118654752440;
    const double re = normal();
    const double im = normal();
    return {kHalfRoot * re, kHalfRoot * im};
  }

  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace catmem

#endif  // CATMEM_RNG_HPP
