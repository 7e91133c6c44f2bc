#include "catmem/analytic_oracle.hpp"

#include "catmem/signatures.hpp"

#include <array>

namespace catmem {

void DecoherenceParams::validate() const {
  if (!(gamma > 0.0)) throw InvalidParameter("decoherence rate gamma must be > 0");
  if (!(n_bar >= 0.0)) throw InvalidParameter("thermal occupation n_bar must be >= 0");
  if (!(t >= 0.0)) throw InvalidParameter("elapsed time t must be >= 0");
}

DecoheredCat decohered_density(double t, Complex alpha0, double gamma) {
  DecoherenceParams{gamma, 0.0, t}.validate();
  const double a2 = std::norm(alpha0);
  return {alpha0 * std::exp(-gamma * t), std::exp(2.0 * a2 * std::expm1(-2.0 * gamma * t))};
}

Complex evolve_characteristic(const CharacteristicFunction& chi0, double s_order, Complex lambda,
                              const DecoherenceParams& params) {
  params.validate();
  const double s_bar = 2.0 * params.n_bar + 1.0;
  const double loss = -std::expm1(-2.0 * params.gamma * params.t);
  const double envelope = std::exp(-(s_bar - s_order) * 0.5 * std::norm(lambda) * loss);
  return envelope * chi0(lambda * std::exp(-params.gamma * params.t));
}

Complex two_component_characteristic_normal(Complex lambda, Complex amplitude, double coherence) {
  const std::array<Complex, 2> pts{amplitude, -amplitude};
  Complex sum{};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      // Term c_ij |a_i><a_j|: Tr = <a_j| e^{lambda a^dag} e^{-lambda* a} |a_i>.
      const Complex a = pts[i], b = pts[j];
      const double c = i == j ? 1.0 : coherence;
      const Complex log_overlap = -0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(b) * a;
      sum += c * std::exp(log_overlap + lambda * std::conj(b) - std::conj(lambda) * a);
    }
  }
  return sum / (2.0 * (1.0 + coherence * std::exp(-2.0 * std::norm(amplitude))));
}

Complex cat_characteristic_normal(Complex lambda, Complex alpha0) {
  return two_component_characteristic_normal(lambda, alpha0, 1.0);
}

GridField evolved_wigner_field(const Axis& re, const Axis& im, double t, double alpha0, double n_bar, double gamma) {
  DecoherenceParams{gamma, n_bar, t}.validate();
  GridField field;
  field.axes = {re, im};
  field.values.resize(re.count, im.count);
  for (Eigen::Index i = 0; i < re.count; ++i)
    for (Eigen::Index j = 0; j < im.count; ++j)
      field.values(i, j) = evolved_wigner(Complex(re.at(i), im.at(j)), t, alpha0, n_bar, gamma);
  return field;
}

double oracle_negativity(double t, double alpha0, double n_bar, double gamma, double h) {
  const WignerGrid grid = WignerGrid::standard(std::abs(alpha0), h);
  return wigner_negativity(evolved_wigner_field(grid.re, grid.im, t, alpha0, n_bar, gamma));
}

}  // namespace catmem
