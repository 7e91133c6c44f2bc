#include "catmem/analytic_oracle.hpp"
#include "catmem/signatures.hpp"

#include "oracles/fock_cat.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace catmem;

TEST_SUITE("analytic_oracle") {
  TEST_CASE("ideal quadrature distributions") {
    const double s = 2.0 * std::numbers::sqrt2;
    // The hill maximum is 1/(sqrt(pi) N) with N = 2(1 + e^-8), i.e. 0.28205.
    CHECK(ideal_P_x(s, 2.0) == doctest::Approx(0.28205).epsilon(1e-4));
    CHECK(ideal_P_x(s, 2.0) ==
          doctest::Approx((1.0 + std::exp(-16.0) + 2.0 * std::exp(-16.0)) / (std::sqrt(std::numbers::pi) * cat_norm(2.0))));
    CHECK(ideal_P_x(0.7, 0.0) == doctest::Approx(std::exp(-0.49) / std::sqrt(std::numbers::pi)));
    CHECK(ideal_P_p(0.0, 2.0) == doctest::Approx(1.12798).epsilon(1e-5));
    CHECK(std::abs(ideal_P_p(std::numbers::pi / (2.0 * std::numbers::sqrt2 * 3.0), 3.0)) < 1e-16);
    CHECK(ideal_P_p(-1.3, 0.0) == doctest::Approx(std::exp(-1.69) / std::sqrt(std::numbers::pi)));
  }

  TEST_CASE("ideal Wigner function") {
    CHECK(ideal_wigner(Complex(5.0, 0.0), 5.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(ideal_wigner(Complex(0.0, 0.0), 5.0) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(std::isfinite(ideal_wigner(Complex(0.0, 3.0), 30.0)));
    const fock::State cat = fock::even_cat(1.7, 60);
    for (const Complex a : {Complex(0.1, 0.2), Complex(-1.0, 0.3), Complex(1.7, 0.0), Complex(0.0, 0.6)})
      CHECK(ideal_wigner(a, 1.7) == doctest::Approx(fock::wigner(cat, a)).epsilon(1e-9));
  }

  TEST_CASE("damped Wigner function reductions") {
    for (const Complex a : {Complex(0.3, -0.2), Complex(2.0, 0.5)})
      CHECK(evolved_wigner(a, 0.0, 2.0, 1.5, 1.0) == doctest::Approx(ideal_wigner(a, 2.0)).epsilon(1e-14));
    const Complex a(0.4, 0.3);
    CHECK(evolved_wigner(a, 60.0, 3.0, 0.0, 1.0) ==
          doctest::Approx(2.0 / std::numbers::pi * std::exp(-2.0 * std::norm(a))).epsilon(1e-10));
    // Long-time limit with n_bar: a thermal state of occupation n_bar.
    const double n = 1.5;
    CHECK(evolved_wigner(a, 60.0, 3.0, n, 1.0) ==
          doctest::Approx(2.0 / (std::numbers::pi * (1 + 2 * n)) * std::exp(-2.0 * std::norm(a) / (1 + 2 * n))).epsilon(1e-10));
  }

  TEST_CASE("damped Wigner function at zero temperature equals the decohered density") {
    const double gamma = 0.7;
    for (double t : {0.05, 0.3, 1.0}) {
      const DecoheredCat d = decohered_density(t, 1.8, gamma);
      const Eigen::MatrixXcd rho = fock::two_component_density(d.amplitude, d.coherence, 50);
      for (const Complex a : {Complex(0.0, 0.0), Complex(0.5, 0.4), Complex(-1.2, 0.1), Complex(0.2, -1.0)})
        CHECK(std::abs(evolved_wigner(a, t, 1.8, 0.0, gamma) - fock::wigner(rho, a)) <= 1e-8);
    }
  }

  TEST_CASE("damped Wigner function matches the evolved characteristic function") {
    // chi_W(lambda) = int W(alpha) exp(lambda alpha* - lambda* alpha) d^2 alpha.
    const double a0 = 2.0, n_bar = 2.0, gamma = 1.0, t = 0.05;
    const Axis ax = Axis::symmetric(7.0, 0.05, AxisTag::PhaseSpaceRe);
    const GridField w = evolved_wigner_field(ax, Axis{ax.min, ax.step, ax.count, AxisTag::PhaseSpaceIm}, t, a0, n_bar, gamma);
    const CharacteristicFunction chi_w0 = [&](Complex l) {
      return cat_characteristic_normal(l, a0) * std::exp(-0.5 * std::norm(l));
    };
    for (const Complex lambda : {Complex(0.0, 0.0), Complex(0.3, 0.1), Complex(0.0, 0.8), Complex(-0.5, 0.4)}) {
      Complex ft{};
      for (Eigen::Index i = 0; i < ax.count; ++i)
        for (Eigen::Index j = 0; j < ax.count; ++j) {
          const Complex alpha(ax.at(i), ax.at(j));
          ft += w.values(i, j) * std::exp(lambda * std::conj(alpha) - std::conj(lambda) * alpha);
        }
      ft *= ax.step * ax.step;
      const Complex expected = evolve_characteristic(chi_w0, 0.0, lambda, {gamma, n_bar, t});
      CHECK(std::abs(ft - expected) < 1e-8);
    }
  }

  TEST_CASE("damped Wigner function stays normalized") {
    for (double a0 : {2.0, 5.0})
      for (double n : {0.0, 2.0})
        for (double t : {0.0, 0.01, 0.1, 0.5}) {
          const WignerGrid g = WignerGrid::standard(a0);
          CHECK(evolved_wigner_field(g.re, g.im, t, a0, n, 1.0).integrate() == doctest::Approx(1.0).epsilon(1e-4));
        }
  }

  TEST_CASE("negativity vanishes at the bound and decreases before it") {
    for (double a0 : {2.0, 3.0, 4.0, 5.0}) {
      CHECK(oracle_negativity(t_positive(0.0, 1.0), a0, 0.0, 1.0) <= 1e-4);
      double previous = std::numeric_limits<double>::infinity();
      for (double t = 0.0; t <= 0.35; t += 0.025) {
        const double d = oracle_negativity(t, a0, 0.0, 1.0);
        CHECK(d <= previous + 1e-12);
        CHECK(d >= 0.0);
        previous = d;
      }
    }
    CHECK(oracle_negativity(t_positive(2.0, 1.0), 2.0, 2.0, 1.0) <= 1e-4);
  }

  TEST_CASE("time bounds") {
    CHECK(t_positive(0.0, 1.0) == doctest::Approx(0.5 * std::numbers::ln2));
    CHECK(t_positive(0.0, 1.0) == doctest::Approx(0.34657).epsilon(1e-5));
    CHECK(t_positive(2.0, 1.0) == doctest::Approx(0.09116).epsilon(1e-4));
    CHECK(t_positive(2.0, 4.0) == doctest::Approx(t_positive(2.0, 1.0) / 4.0));
    CHECK(t_positive(1e9, 1.0) < 1e-9);
    for (double n : {0.0, 0.5, 2.0}) CHECK(std::abs(q_function(t_positive(n, 1.0), n, 1.0)) < 1e-15);
    CHECK(t_p_bound(1.0, 1.0) == doctest::Approx(0.5 * std::numbers::ln2));
    CHECK(std::isinf(t_p_bound(0.0, 1.0)));
    CHECK(t_p_bound(1e9, 1.0) < 1e-9);
    for (double n : {0.01, 0.5, 2.0, 100.0}) CHECK(t_positive(n, 1.0) < t_p_bound(n, 1.0));
    CHECK_THROWS_AS((void)t_positive(-1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS((void)t_p_bound(1.0, 0.0), InvalidParameter);
  }

  TEST_CASE("cat variance") {
    CHECK(std::round(cat_variance(1.0) * 1e4) / 1e4 == 0.2616);
    CHECK(std::round(cat_variance(2.0) * 1e4) / 1e4 == 0.4973);
    CHECK(cat_variance(0.0) == 0.5);
    // Beyond a0 ~ 4 the deficit 2 a0^2 e^{-2 a0^2} drops below double resolution at 0.5.
    for (double a = 0.05; a <= 3.5; a += 0.05) CHECK(cat_variance(a) < 0.5);
  }

  TEST_CASE("decohered density") {
    const Complex a0(1.5, 0.5);
    const DecoheredCat d0 = decohered_density(0.0, a0, 1.0);
    CHECK(d0.coherence == 1.0);
    CHECK(d0.amplitude == a0);
    const DecoheredCat half = decohered_density(0.5 * std::numbers::ln2, a0, 1.0);
    CHECK(half.coherence == doctest::Approx(std::exp(-std::norm(a0))));
    CHECK(std::abs(half.amplitude - a0 / std::numbers::sqrt2) < 1e-15);
    CHECK(decohered_density(50.0, a0, 1.0).coherence == doctest::Approx(std::exp(-2.0 * std::norm(a0))));
    CHECK(decohered_density(50.0, a0, 1.0).coherence > 0.0);
  }

  TEST_CASE("characteristic function evolution") {
    const Complex a0(1.2, 0.0);
    const CharacteristicFunction chi = [&](Complex l) { return cat_characteristic_normal(l, a0); };
    const Complex l(0.4, -0.3);
    CHECK(std::abs(evolve_characteristic(chi, 1.0, l, {1.0, 0.0, 0.0}) - chi(l)) < 1e-15);
    CHECK(std::abs(evolve_characteristic(chi, 1.0, 0.0, {1.0, 2.0, 0.7}) - 1.0) < 1e-15);
    const double t = 0.5 * std::numbers::ln2;
    const DecoheredCat d = decohered_density(t, a0, 1.0);
    CHECK(d.coherence == doctest::Approx(std::exp(-std::norm(a0))));
    for (const Complex lam : {Complex(0.2, 0.0), Complex(-0.6, 0.9), Complex(1.1, 0.3)}) {
      const Complex evolved = evolve_characteristic(chi, 1.0, lam, {1.0, 0.0, t});
      CHECK(std::abs(evolved - two_component_characteristic_normal(lam, d.amplitude, d.coherence)) < 1e-13);
    }
  }

  TEST_CASE("decoherence parameter validation") {
    CHECK_THROWS_AS((DecoherenceParams{0.0, 0.0, 1.0}.validate()), InvalidParameter);
    CHECK_THROWS_AS((DecoherenceParams{1.0, -1.0, 1.0}.validate()), InvalidParameter);
    CHECK_THROWS_AS((DecoherenceParams{1.0, 0.0, -1.0}.validate()), InvalidParameter);
  }
}
