#include "catmem/analytic_oracle.hpp"
#include "catmem/cat_sampler.hpp"
#include "catmem/sde_engine.hpp"
#include "catmem/signatures.hpp"

#include "oracles/fock_cat.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace catmem;

namespace {

// Identity channel: the retrieved pair equals the input pair.
std::vector<TrajectoryResult> ideal(Complex a0, std::size_t n = 4) {
  std::vector<TrajectoryResult> out;
  for (const auto& s : sample_cat({CatParams{a0}, n, 1, true}))
    out.push_back({s.alpha_in, s.alpha_in_plus, s.weight, s.branch, {}, {}});
  return out;
}

double max_abs_diff(const GridField& f, const auto& g) {
  double worst = 0.0;
  const Axis& ax = f.axes[0];
  for (Eigen::Index k = 0; k < ax.count; ++k) worst = std::max(worst, std::abs(f.values(k, 0) - g(ax.at(k))));
  return worst;
}

}  // namespace

TEST_SUITE("signatures") {
  TEST_CASE("quadrature kernel values") {
    const double half_pi = 0.5 * std::numbers::pi;
    CHECK(quadrature_kernel(0.0, half_pi, 0.0, 0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)));
    CHECK(quadrature_kernel(0.0, half_pi, 0.0, 0.0) == doctest::Approx(0.56419).epsilon(1e-5));
    const auto r = ideal(2.0);
    auto branch_sum = [&](double p) {
      double s = 0.0;
      for (const auto& t : r) s += t.weight * quadrature_kernel(p, half_pi, t.alpha_out, t.alpha_out_plus);
      return s / 4.0;
    };
    CHECK(branch_sum(0.0) == doctest::Approx(2.0 / (std::sqrt(std::numbers::pi) * (1.0 + std::exp(-8.0)))));
    CHECK(branch_sum(0.0) == doctest::Approx(1.12798).epsilon(1e-5));
    CHECK(std::abs(branch_sum(std::numbers::pi / (4.0 * std::numbers::sqrt2))) < 1e-12);
  }

  TEST_CASE("ideal cat quadrature distributions") {
    const auto r = ideal(2.0);
    const GridField pp = p_distribution(r, QuadratureGrid::standard(0.5 * std::numbers::pi, 2.0));
    CHECK(max_abs_diff(pp, [](double p) { return ideal_P_p(p, 2.0); }) <= 1e-10);
    const GridField px = p_distribution(r, QuadratureGrid::standard(0.0, 2.0));
    CHECK(max_abs_diff(px, [](double x) { return ideal_P_x(x, 2.0); }) <= 1e-10);
    CHECK(pp.integrate() == doctest::Approx(1.0).epsilon(1e-10));
    for (Eigen::Index k = 0; k < pp.axes[0].count; ++k)
      CHECK(std::abs(pp.values(k, 0) - pp.values(pp.axes[0].count - 1 - k, 0)) < 1e-12);
  }

  TEST_CASE("quadrature distributions agree with the Fock oracle at any angle") {
    const Complex a0(1.3, 0.4);
    const auto r = ideal(a0);
    const fock::State cat = fock::even_cat(a0, 60);
    for (double theta : {0.0, 0.7, 2.1}) {
      const GridField f = p_distribution(r, QuadratureGrid::standard(theta, std::abs(a0)));
      double worst = 0.0;
      for (Eigen::Index k = 0; k < f.axes[0].count; k += 37)
        worst = std::max(worst, std::abs(f.values(k, 0) - fock::quadrature_distribution(cat, f.axes[0].at(k), theta)));
      CHECK(worst < 1e-10);
    }
  }

  TEST_CASE("vacuum quadrature distribution") {
    const GridField f = p_distribution(ideal(0.0), QuadratureGrid::standard(0.5 * std::numbers::pi, 0.0));
    CHECK(max_abs_diff(f, [](double p) { return std::exp(-p * p) / std::sqrt(std::numbers::pi); }) < 1e-14);
  }

  TEST_CASE("Wigner estimate of ideal cats") {
    const auto big = ideal(5.0);
    Axis one{5.0, 0.05, 1, AxisTag::PhaseSpaceRe}, zero{0.0, 0.05, 1, AxisTag::PhaseSpaceIm};
    const GridField peak = wigner_estimate(big, WignerGrid{one, zero});
    CHECK(peak.values(0, 0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    Axis origin{0.0, 0.05, 1, AxisTag::PhaseSpaceRe};
    CHECK(wigner_estimate(big, WignerGrid{origin, zero}).values(0, 0) ==
          doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));

    const WignerGrid grid = WignerGrid::standard(0.0);
    const GridField vac = wigner_estimate(ideal(0.0), grid);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grid.re.count; ++i)
      for (Eigen::Index j = 0; j < grid.im.count; ++j) {
        const double r2 = grid.re.at(i) * grid.re.at(i) + grid.im.at(j) * grid.im.at(j);
        worst = std::max(worst, std::abs(vac.values(i, j) - 2.0 / std::numbers::pi * std::exp(-2.0 * r2)));
      }
    CHECK(worst < 1e-14);
    CHECK(wigner_negativity(vac) == 0.0);
  }

  TEST_CASE("Wigner estimate agrees with the Fock oracle") {
    const Complex a0(1.5, 0.0);
    const fock::State cat = fock::even_cat(a0, 50);
    const auto r = ideal(a0);
    for (const Complex alpha : {Complex(0.0, 0.0), Complex(0.3, 0.2), Complex(-1.1, 0.45), Complex(1.5, -0.1)}) {
      const GridField w = wigner_estimate(
          r, WignerGrid{{alpha.real(), 0.05, 1, AxisTag::PhaseSpaceRe}, {alpha.imag(), 0.05, 1, AxisTag::PhaseSpaceIm}});
      CHECK(w.values(0, 0) == doctest::Approx(fock::wigner(cat, alpha)).epsilon(1e-8));
    }
  }

  TEST_CASE("negativity of the ideal cat matches a fine-grid quadrature") {
    const GridField w = wigner_estimate(ideal(2.0), WignerGrid::standard(2.0));
    // Independent fine grid (h = 0.01, extent 8), midpoint rule on max(-W, 0).
    double fine = 0.0;
    const double h = 0.01;
    for (double x = -8.0 + h / 2; x < 8.0; x += h)
      for (double y = -8.0 + h / 2; y < 8.0; y += h)
        fine += std::max(-ideal_wigner(Complex(x, y), 2.0), 0.0);
    fine *= h * h;
    CHECK(wigner_negativity(w) == doctest::Approx(fine).epsilon(2e-3));
    CHECK(w.integrate() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(w.imag_residual < 1e-12);
  }

  TEST_CASE("Wigner marginal equals the x distribution") {
    const auto r = ideal(Complex(1.2, 0.6));
    const WignerGrid grid = WignerGrid::standard(std::abs(Complex(1.2, 0.6)));
    const GridField w = wigner_estimate(r, grid);
    const Eigen::ArrayXd wy = trapezoid_weights(grid.im);
    for (Eigen::Index i = 0; i < grid.re.count; i += 11) {
      const double x = std::numbers::sqrt2 * grid.re.at(i);
      const double marginal = (w.values.row(i).transpose() * wy).sum() / std::numbers::sqrt2;
      double px = 0.0;
      for (const auto& t : r) px += t.weight * quadrature_kernel(x, 0.0, t.alpha_out, t.alpha_out_plus);
      CHECK(std::abs(marginal - px / r.size()) < 1e-9);
    }
  }

  TEST_CASE("density reconstruction") {
    const auto big = ideal(5.0);
    const Complex diag = density_element(big, 5.0, 5.0);
    const Complex off = density_element(big, 5.0, -5.0);
    CHECK(std::abs(off) == doctest::Approx(std::abs(diag)).epsilon(1e-10));
    CHECK(std::abs(density_element(ideal(0.0), 0.0, 0.0) - 1.0) < 1e-15);

    const Complex a0(1.5, 0.0);
    const fock::State cat = fock::even_cat(a0, 50);
    const auto r = ideal(a0);
    for (const auto& [a, b] : {std::pair{0.2, -1.3}, std::pair{1.5, 1.5}, std::pair{-0.7, 2.0}})
      CHECK(std::abs(density_element(r, a, b) - fock::coherent_element(cat, a, b)) < 1e-12);

    const Axis ax = Axis::symmetric(3.0, 0.1, AxisTag::CoherentA);
    const GridField rho = reconstruct_density(r, ax, Axis{ax.min, ax.step, ax.count, AxisTag::CoherentB});
    CHECK((rho.values - rho.values.transpose()).abs().maxCoeff() < 1e-14);
    CHECK(rho.values(5, 17) == doctest::Approx(std::abs(density_element(r, ax.at(5), ax.at(17)))));
  }

  TEST_CASE("branch filters split the density operator") {
    const auto r = ideal(2.0);
    for (const auto& [a, b] : {std::pair{0.5, -0.5}, std::pair{2.0, 1.0}}) {
      const Complex all = density_element(r, a, b);
      const Complex parts =
          density_element(r, a, b, BranchFilter::Diagonal) + density_element(r, a, b, BranchFilter::Coherence);
      CHECK(std::abs(all - parts) < 1e-15);
    }
  }

  TEST_CASE("p variance") {
    const double expected[] = {0.2616, 0.4973, 0.5, 0.5};
    const double a0s[] = {1.0, 2.0, 3.0, 5.0};
    for (int k = 0; k < 4; ++k) {
      const VarianceEstimate v = p_variance(ideal(a0s[k]));
      CHECK(std::round(v.variance * 1e4) / 1e4 == expected[k]);
      CHECK(v.variance == doctest::Approx(cat_variance(a0s[k])).epsilon(1e-12));
      CHECK(std::abs(v.mean_p) < 1e-15);
    }
    CHECK(p_variance(ideal(0.0)).variance == doctest::Approx(0.5));
  }

  TEST_CASE("mixture bound") {
    CHECK(is_mixture_falsified(0.2616));
    CHECK_FALSE(is_mixture_falsified(0.5));
    CHECK(is_mixture_falsified(0.4987));
    CHECK_THROWS((void)is_mixture_falsified(-0.1));
  }

  TEST_CASE("fringe contrast") {
    const auto r = ideal(5.0);
    const QuadratureGrid grid = QuadratureGrid::standard(0.5 * std::numbers::pi, 5.0);
    const double c = fringe_contrast(p_distribution(r, grid), p_distribution(r, grid, BranchFilter::Diagonal), 1.0);
    // The fringe nulls fall between grid points, so the sampled minimum is slightly above 0.
    CHECK(c == doctest::Approx(1.0).epsilon(1e-3));
    const auto vac = ideal(0.0);
    const GridField v = p_distribution(vac, grid);
    CHECK(fringe_contrast(v, v, 1.0) == 0.0);
  }

  TEST_CASE("block counts and jackknife") {
    CHECK(balanced_block_count(200000, 250) == 250);
    CHECK(balanced_block_count(50000, 250) == 250);
    CHECK(balanced_block_count(4, 250) == 1);
    CHECK(balanced_block_count(400, 250) == 100);

    const auto quiet = ideal(2.0, 8);
    const NegativityEstimate q = wigner_negativity_jackknife(quiet, WignerGrid::standard(2.0), 2);
    CHECK(q.standard_error < 1e-12);
    CHECK(q.negativity == doctest::Approx(wigner_negativity(wigner_estimate(quiet, WignerGrid::standard(2.0)))));
    CHECK_THROWS_AS((void)wigner_negativity_jackknife(quiet, WignerGrid::standard(2.0), 1), InvalidParameter);

    SystemParams p;
    p.n_th_mech = 2.0;
    const ProtocolSchedule s = default_schedule(p, storage_time_from_lifetimes(0.02, p));
    const auto samples = sample_cat({CatParams{Complex(2.0, 0.0)}, 800, 1, true});
    const auto noisy = run_ensemble(samples, p, s, 3, 1);
    const NegativityEstimate e = wigner_negativity_jackknife(noisy, WignerGrid::standard(2.0), 100);
    CHECK(e.standard_error > 0.0);
    CHECK(e.negativity == doctest::Approx(wigner_negativity(wigner_estimate(noisy, WignerGrid::standard(2.0)))));
  }
}
