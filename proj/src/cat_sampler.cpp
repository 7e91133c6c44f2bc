#include "catmem/cat_sampler.hpp"

#include <array>
#include <cmath>
#include <string>

namespace catmem {

void SamplerConfig::validate() const {
  if (n_samples < 4) throw InvalidParameter("n_samples must be >= 4");
  if (stratified && n_samples % 4 != 0)
    throw InvalidParameter("stratified sampling needs n_samples divisible by 4, got " + std::to_string(n_samples));
  if (!std::isfinite(cat.alpha0.real()) || !std::isfinite(cat.alpha0.imag()))
    throw InvalidParameter("cat amplitude must be finite");
}

double diagonal_weight(const CatParams& cat) { return 2.0 / (1.0 + cat.overlap()); }

double offdiagonal_weight(const CatParams& cat) {
  const double e = cat.overlap();
  return 2.0 * e / (1.0 + e);
}

WeightedSample make_branch_sample(const CatParams& cat, Branch branch) {
  const Complex a = cat.alpha0;
  switch (branch) {
    case Branch::PlusPlus: return {a, std::conj(a), diagonal_weight(cat), branch};
    case Branch::MinusMinus: return {-a, -std::conj(a), diagonal_weight(cat), branch};
    case Branch::PlusMinus: return {a, -std::conj(a), offdiagonal_weight(cat), branch};
    case Branch::MinusPlus: return {-a, std::conj(a), offdiagonal_weight(cat), branch};
  }
  throw InvalidParameter("unknown branch");
}

std::vector<WeightedSample> sample_cat(const SamplerConfig& config) {
  config.validate();
  constexpr std::array kOrder{Branch::PlusPlus, Branch::MinusMinus, Branch::PlusMinus, Branch::MinusPlus};
  std::vector<WeightedSample> out;
  out.reserve(config.n_samples);
  if (config.stratified) {
    const std::size_t per_branch = config.n_samples / 4;
    for (Branch b : kOrder)
      for (std::size_t i = 0; i < per_branch; ++i) out.push_back(make_branch_sample(config.cat, b));
    return out;
  }
  // Branch choice uses a stream index disjoint from the trajectory streams.
  CounterStream rng(config.master_seed, ~std::uint64_t{0});
  for (std::size_t i = 0; i < config.n_samples; ++i) out.push_back(make_branch_sample(config.cat, kOrder[rng() >> 62]));
  return out;
}

std::vector<std::pair<Complex, Complex>> sample_thermal(double n_occupation, std::size_t count, CounterStream& rng) {
  if (!(n_occupation >= 0.0)) throw InvalidParameter("thermal occupation must be >= 0");
  std::vector<std::pair<Complex, Complex>> out(count);
  if (n_occupation == 0.0) return out;
  const double scale = std::sqrt(n_occupation);
  for (auto& [b, bp] : out) {
    b = scale * rng.complex_normal();
    bp = std::conj(b);
  }
  return out;
}

CatMoments verify_cat_moments(std::span<const WeightedSample> samples) {
  CatMoments m;
  if (samples.empty()) return m;
  // Compensated sum so the mean weight is exact to rounding of the weights themselves.
  double carry = 0.0;
  for (const auto& s : samples) {
    m.mean_a += s.weight * s.alpha_in;
    m.mean_a2 += s.weight * s.alpha_in * s.alpha_in;
    m.mean_adag_a += s.weight * s.alpha_in_plus * s.alpha_in;
    const double t = m.mean_weight + s.weight;
    carry += std::abs(m.mean_weight) >= std::abs(s.weight) ? (m.mean_weight - t) + s.weight
                                                            : (s.weight - t) + m.mean_weight;
    m.mean_weight = t;
  }
  m.mean_weight += carry;
  const double inv = 1.0 / static_cast<double>(samples.size());
  m.mean_a *= inv;
  m.mean_a2 *= inv;
  m.mean_adag_a *= inv;
  m.mean_weight *= inv;
  return m;
}

}  // namespace catmem
