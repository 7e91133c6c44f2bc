// Closed-form results for an even cat state: ideal quadrature distributions
// and Wigner function, the Wigner function after amplitude damping into a
// thermal reservoir, and the negativity / P-positivity time bounds.

#ifndef CATMEM_ANALYTIC_ORACLE_HPP
#define CATMEM_ANALYTIC_ORACLE_HPP

#include "catmem/core_model.hpp"
#include "catmem/grid_field.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>

namespace catmem {

/// Amplitude damping at rate gamma into a reservoir with occupation n_bar, for a time t.
struct DecoherenceParams {
  double gamma = 1.0;
  double n_bar = 0.0;
  double t = 0.0;

  void validate() const;
};

/// Normalization 2(1 + exp(-2 a0^2)) of the even cat with real amplitude a0.
template <typename Real>
[[nodiscard]] Real cat_norm(Real alpha0) {
  return Real(2) * (Real(1) + std::exp(Real(-2) * alpha0 * alpha0));
}

/// x-quadrature distribution of the ideal even cat (real a0).
template <typename Real>
[[nodiscard]] Real ideal_P_x(Real x, Real alpha0) {
  const Real s = std::numbers::sqrt2_v<Real> * alpha0;
  const Real sum = std::exp(-(x - s) * (x - s)) + std::exp(-(x + s) * (x + s)) +
                   Real(2) * std::exp(-x * x - Real(2) * alpha0 * alpha0);
  return sum / (std::sqrt(std::numbers::pi_v<Real>) * cat_norm(alpha0));
}

/// p-quadrature distribution of the ideal even cat (real a0); shows fringes.
template <typename Real>
[[nodiscard]] Real ideal_P_p(Real p, Real alpha0) {
  const Real fringe = Real(1) + std::cos(Real(2) * std::numbers::sqrt2_v<Real> * p * alpha0);
  return Real(2) * std::exp(-p * p) * fringe / (std::sqrt(std::numbers::pi_v<Real>) * cat_norm(alpha0));
}

/// Wigner function of the ideal even cat, written as the four-term sum.
template <typename Real>
[[nodiscard]] Real ideal_wigner(std::complex<Real> alpha, Real alpha0) {
  using C = std::complex<Real>;
  const C am = alpha - alpha0;
  const C ap = alpha + alpha0;
  const Real log_overlap = Real(-2) * alpha0 * alpha0;
  const C sum = std::exp(Real(-2) * std::conj(am) * am) + std::exp(Real(-2) * std::conj(ap) * ap) +
                std::exp(log_overlap - Real(2) * std::conj(am) * ap) + std::exp(log_overlap - Real(2) * std::conj(ap) * am);
  return Real(2) * sum.real() / (std::numbers::pi_v<Real> * cat_norm(alpha0));
}

/// Wigner function of the cat after damping for time t at rate gamma into a
/// reservoir of occupation n_bar. Equal to ideal_wigner at t = 0.
template <typename Real>
[[nodiscard]] Real evolved_wigner(std::complex<Real> alpha, Real t, Real alpha0, Real n_bar, Real gamma) {
  using C = std::complex<Real>;
  const Real shrink = std::exp(-gamma * t);
  const Real spread = Real(1) + Real(2) * n_bar * (-std::expm1(Real(-2) * gamma * t));
  const C am = alpha - alpha0 * shrink;
  const C ap = alpha + alpha0 * shrink;
  const Real k = Real(-2) / spread;
  // The overlap e^{-2 a0^2} is folded into the cross-term exponents so large cats cannot overflow.
  const C sum = std::exp(k * std::conj(am) * am) + std::exp(k * std::conj(ap) * ap) +
                std::exp(Real(-2) * alpha0 * alpha0 + k * std::conj(am) * ap) +
                std::exp(Real(-2) * alpha0 * alpha0 + k * std::conj(ap) * am);
  return Real(2) * sum.real() / (std::numbers::pi_v<Real> * cat_norm(alpha0) * spread);
}

/// Variance of p for the ideal even cat: 1/2 - 2 a0^2 e^{-2a0^2}/(1 + e^{-2a0^2}).
template <typename Real>
[[nodiscard]] Real cat_variance(Real alpha0) {
  const Real e = std::exp(Real(-2) * alpha0 * alpha0);
  return Real(0.5) - Real(2) * alpha0 * alpha0 * e / (Real(1) + e);
}

/// Zero-temperature damped cat: amplitude a0 e^{-gamma t} and off-diagonal
/// coefficient exp(-2|a0|^2 (1 - e^{-2 gamma t})) multiplying |a><-a| and |-a><a|.
struct DecoheredCat {
  Complex amplitude;
  double coherence = 1.0;
};

[[nodiscard]] DecoheredCat decohered_density(double t, Complex alpha0, double gamma);

/// 1/2 - (1 + n_bar)(1 - e^{-2 gamma t}); its root is t_positive.
template <typename Real>
[[nodiscard]] Real q_function(Real t, Real n_bar, Real gamma) {
  return Real(0.5) + (Real(1) + n_bar) * std::expm1(Real(-2) * gamma * t);
}

/// Upper bound on the time for which the damped cat's Wigner function can stay negative.
template <typename Real>
[[nodiscard]] Real t_positive(Real n_bar, Real gamma) {
  if (!(n_bar >= Real(0)) || !(gamma > Real(0))) throw InvalidParameter("t_positive needs n_bar >= 0, gamma > 0");
  return std::log((Real(1) + n_bar) / (Real(0.5) + n_bar)) / (Real(2) * gamma);
}

/// Time after which the Glauber P function is positive; +infinity at n_bar = 0.
template <typename Real>
[[nodiscard]] Real t_p_bound(Real n_bar, Real gamma) {
  if (!(n_bar >= Real(0)) || !(gamma > Real(0))) throw InvalidParameter("t_p_bound needs n_bar >= 0, gamma > 0");
  if (n_bar == Real(0)) return std::numeric_limits<Real>::infinity();
  return std::log1p(Real(1) / n_bar) / (Real(2) * gamma);
}

using CharacteristicFunction = std::function<Complex(Complex)>;

/// s-ordered characteristic function after damping:
/// chi_s(lambda, t) = exp(-(2 n_bar + 1 - s) |lambda|^2 / 2 (1 - e^{-2 gamma t})) chi_s(lambda e^{-gamma t}, 0).
[[nodiscard]] Complex evolve_characteristic(const CharacteristicFunction& chi0, double s_order, Complex lambda,
                                            const DecoherenceParams& params);

/// Normally ordered characteristic function Tr(rho e^{lambda a^dag} e^{-lambda* a}) of the even cat.
[[nodiscard]] Complex cat_characteristic_normal(Complex lambda, Complex alpha0);

/// Same for rho = (|b><b| + |-b><-b| + c |b><-b| + c |-b><b|) / (2 (1 + c e^{-2|b|^2})).
[[nodiscard]] Complex two_component_characteristic_normal(Complex lambda, Complex amplitude, double coherence);

/// evolved_wigner tabulated on a (Re alpha, Im alpha) grid.
[[nodiscard]] GridField evolved_wigner_field(const Axis& re, const Axis& im, double t, double alpha0, double n_bar,
                                             double gamma);

/// Negativity of the damped cat evaluated on the standard grid (half-width a0 + 4, spacing h).
[[nodiscard]] double oracle_negativity(double t, double alpha0, double n_bar, double gamma, double h = 0.05);

}  // namespace catmem

#endif  // CATMEM_ANALYTIC_ORACLE_HPP
