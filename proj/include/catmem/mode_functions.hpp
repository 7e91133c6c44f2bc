// Temporal mode functions of the write/read protocol and the source-cavity
// output coupler.
//
// u_in is the mode-matched input envelope that loads the mechanical mode;
// u_out is its time reverse, used to extract the retrieved pulse. The
// exponential approximation u_exp_approx and kappa_source describe the
// source cavity that emits such a pulse.

#ifndef CATMEM_MODE_FUNCTIONS_HPP
#define CATMEM_MODE_FUNCTIONS_HPP

#include "catmem/core_model.hpp"

#include <cmath>
#include <complex>

namespace catmem {

template <typename Real = double>
class ModeFunctionSpec {
 public:
  using ComplexT = std::complex<Real>;

  ModeFunctionSpec(const SystemParams& params, Real t_store) : gamma_ext_(params.gamma_ext), t_store_(t_store) {
    params.validate();
    const DerivedRates r = derive_rates(params);
    gamma_plus_ = static_cast<Real>(r.gamma_plus);
    m_ = ComplexT(static_cast<Real>(r.m_rate.real()), static_cast<Real>(r.m_rate.imag()));
    if (std::abs(m_) < Real(1e-12))
      throw InvalidParameter("mode function undefined at g = gamma_minus (m = 0)");
    const ComplexT inner = (gamma_plus_ + m_) * (gamma_plus_ - m_) * gamma_plus_;
    prefactor_ = ComplexT(0, -2) * std::sqrt(inner) / m_;
  }

  [[nodiscard]] Real gamma_plus() const { return gamma_plus_; }
  [[nodiscard]] ComplexT m_rate() const { return m_; }
  [[nodiscard]] ComplexT prefactor() const { return prefactor_; }
  [[nodiscard]] Real gamma_ext() const { return gamma_ext_; }
  [[nodiscard]] Real t_store() const { return t_store_; }

 private:
  Real gamma_plus_{};
  ComplexT m_{};
  ComplexT prefactor_{};
  Real gamma_ext_{};
  Real t_store_{};
};

/// Optimal input envelope; supported on t < 0.
template <typename Real>
[[nodiscard]] std::complex<Real> u_in(Real t, const ModeFunctionSpec<Real>& spec) {
  if (!(t < Real(0))) return {};
  return spec.prefactor() * std::sinh(spec.m_rate() * t) * std::exp(spec.gamma_plus() * t);
}

/// Output envelope conj(u_in(t_store - t)); supported on t > t_store.
template <typename Real>
[[nodiscard]] std::complex<Real> u_out(Real t, const ModeFunctionSpec<Real>& spec) {
  return std::conj(u_in(spec.t_store() - t, spec));
}

/// i sqrt(2 gbar) exp(gbar t) for t < 0.
template <typename Real>
[[nodiscard]] std::complex<Real> u_exp_approx(Real t, Real gamma_bar_real) {
  if (!(gamma_bar_real > Real(0))) throw InvalidParameter("u_exp_approx needs gamma_bar > 0");
  if (!(t < Real(0))) return {};
  return std::complex<Real>(0, std::sqrt(2 * gamma_bar_real) * std::exp(gamma_bar_real * t));
}

/// Source-cavity output coupling that emits the rising exponential pulse.
/// Diverges at t -> 0-, so t >= 0 is rejected.
template <typename Real>
[[nodiscard]] Real kappa_source(Real t, Real gamma_bar_real) {
  if (!(gamma_bar_real > Real(0))) throw InvalidParameter("kappa_source needs gamma_bar > 0");
  if (!(t < Real(0))) throw DomainError("kappa_source is singular for t >= 0");
  return gamma_bar_real / std::expm1(-2 * gamma_bar_real * t);
}

template <typename Real>
[[nodiscard]] Real kappa_source_derivative(Real t, Real gamma_bar_real) {
  const Real k = kappa_source(t, gamma_bar_real);
  const Real e = std::exp(-2 * gamma_bar_real * t);
  return 2 * k * k * e;
}

/// dkappa/dt - 2 kappa (du0/dt)/u0 - 2 kappa^2. Zero for a consistent (kappa, u0) pair.
/// For such pairs (du0/dt)/u0 is real; the real part of the residual is returned.
template <typename Real>
[[nodiscard]] Real coupler_ode_residual(Real kappa, Real dkappa_dt, std::complex<Real> u0, std::complex<Real> du0_dt) {
  if (u0 == std::complex<Real>{}) throw DomainError("coupler residual undefined where u0 = 0");
  const std::complex<Real> log_derivative = du0_dt / u0;
  return dkappa_dt - 2 * kappa * log_derivative.real() - 2 * kappa * kappa;
}

/// |<b(0)>/alpha| for a coherent input during the write stage.
[[nodiscard]] inline double transfer_amplitude(const SystemParams& params) {
  params.validate();
  const DerivedRates r = derive_rates(params);
  if (std::abs(r.m_rate) < 1e-12) throw InvalidParameter("transfer amplitude undefined at m = 0");
  const Complex inner = (r.gamma_plus + r.m_rate) * (r.gamma_plus - r.m_rate) * r.gamma_plus;
  return std::abs(std::sqrt(2.0 * params.gamma_ext) * params.g_eff / (2.0 * std::sqrt(inner)));
}

}  // namespace catmem

#endif  // CATMEM_MODE_FUNCTIONS_HPP
