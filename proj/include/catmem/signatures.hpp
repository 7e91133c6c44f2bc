// Estimators of cat-state signatures from weighted positive-P output samples.
//
// Every estimator is a weighted mean (1/N) sum_i w_i K(alpha_i, alpha_i^+)
// of a single-sample kernel. The Wigner and coherent-basis kernels factor
// into a product of a row term and a column term, so grid evaluations are
// done as dense matrix products.

#ifndef CATMEM_SIGNATURES_HPP
#define CATMEM_SIGNATURES_HPP

#include "catmem/core_model.hpp"
#include "catmem/grid_field.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace catmem {

/// Which samples contribute to an estimate. Coherence keeps only +- / -+
/// samples, i.e. the off-diagonal term of the density operator.
enum class BranchFilter { All, Diagonal, Coherence };

struct QuadratureGrid {
  double theta = 0.0;
  Axis points;

  /// [-12, 12] with step 0.01, widened if needed to cover sqrt(2)|a0| + 5.
  [[nodiscard]] static QuadratureGrid standard(double theta, double alpha0_abs);
};

struct WignerGrid {
  Axis re;
  Axis im;

  /// Square grid of half-width |a0| + 4 and spacing h.
  [[nodiscard]] static WignerGrid standard(double alpha0_abs, double h = 0.05);
};

/// <x_theta|a><a+*|x_theta> / <a+*|a>, analytically continued to
/// non-conjugate pairs. Evaluated as a single exponential.
[[nodiscard]] Complex quadrature_kernel_complex(double x, double theta, Complex alpha, Complex alpha_plus);
/// Real part of quadrature_kernel_complex.
[[nodiscard]] double quadrature_kernel(double x, double theta, Complex alpha, Complex alpha_plus);

/// Quadrature distribution along `grid.theta`. imag_residual holds the
/// largest |Im| of the estimate over the grid.
[[nodiscard]] GridField p_distribution(std::span<const TrajectoryResult> results, const QuadratureGrid& grid,
                                       BranchFilter filter = BranchFilter::All);

/// Wigner function on a (Re alpha, Im alpha) grid.
[[nodiscard]] GridField wigner_estimate(std::span<const TrajectoryResult> results, const WignerGrid& grid,
                                        BranchFilter filter = BranchFilter::All);

/// Half the integrated absolute negative part, by the trapezoid rule.
[[nodiscard]] double wigner_negativity(const GridField& field);

struct NegativityEstimate {
  GridField wigner;
  double negativity = 0.0;
  /// Delete-a-block jackknife standard error of the negativity.
  double standard_error = 0.0;
  std::size_t blocks = 0;
};

/// Wigner estimate plus its negativity with a delete-a-block jackknife error.
/// Sample i goes to block i mod `blocks`; with stratified ensembles and
/// (N/4) divisible by `blocks` every block holds the same branch mix.
[[nodiscard]] NegativityEstimate wigner_negativity_jackknife(std::span<const TrajectoryResult> results,
                                                             const WignerGrid& grid, std::size_t blocks);

/// Largest block count <= max_blocks that divides N/4 (falls back to dividing N).
[[nodiscard]] std::size_t balanced_block_count(std::size_t n_samples, std::size_t max_blocks);

/// |<a| rho |b>| on real coherent-state labels a, b.
[[nodiscard]] GridField reconstruct_density(std::span<const TrajectoryResult> results, const Axis& a_axis,
                                            const Axis& b_axis, BranchFilter filter = BranchFilter::All);

/// Complex <a| rho |b> at one point.
[[nodiscard]] Complex density_element(std::span<const TrajectoryResult> results, double a, double b,
                                      BranchFilter filter = BranchFilter::All);

struct VarianceEstimate {
  double variance = 0.0;
  double mean_p = 0.0;
  /// Largest |Im| among <p^2> and <p>.
  double imag_residual = 0.0;
};

/// Variance of p = (a - a^dag)/(i sqrt 2) from normally ordered moments.
[[nodiscard]] VarianceEstimate p_variance(std::span<const TrajectoryResult> results);

/// True iff the variance lies strictly below the mixture bound 1/2.
[[nodiscard]] bool is_mixture_falsified(double variance);

/// Contrast of the interference fringes of a p-distribution: the full
/// distribution is divided by its fringe-free (diagonal-branch) envelope and
/// the visibility (max - min)/(max + min) of the ratio is taken over |p| <= half_width.
[[nodiscard]] double fringe_contrast(const GridField& p_full, const GridField& p_envelope, double half_width);

}  // namespace catmem

#endif  // CATMEM_SIGNATURES_HPP
