#include "catmem/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace catmem {

namespace {

bool keep(BranchFilter filter, Branch b) {
  switch (filter) {
    case BranchFilter::All: return true;
    case BranchFilter::Diagonal: return is_diagonal(b);
    case BranchFilter::Coherence: return !is_diagonal(b);
  }
  return true;
}

void require_nonempty(std::span<const TrajectoryResult> results, const char* what) {
  if (results.empty()) throw InvalidParameter(std::string(what) + ": empty ensemble");
}

std::vector<std::size_t> selected(std::span<const TrajectoryResult> results, BranchFilter filter) {
  std::vector<std::size_t> idx;
  idx.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].weight != 0.0 && keep(filter, results[i].branch)) idx.push_back(i);
  return idx;
}

constexpr Eigen::Index kChunk = 2048;

/// Accumulates sum_i Fx(:, i) Fy(:, i)^T over the listed samples, building the
/// factor matrices chunk by chunk to bound memory.
template <typename RowFactor, typename ColFactor>
Eigen::MatrixXcd separable_sum(std::span<const TrajectoryResult> results, const std::vector<std::size_t>& idx,
                               const Eigen::ArrayXd& rows, const Eigen::ArrayXd& cols, RowFactor row_exponent,
                               ColFactor col_exponent) {
  const Eigen::Index nr = rows.size();
  const Eigen::Index nc = cols.size();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(nr, nc);
  Eigen::MatrixXcd fr, fc;
  for (std::size_t lo = 0; lo < idx.size(); lo += kChunk) {
    const auto len = static_cast<Eigen::Index>(std::min<std::size_t>(kChunk, idx.size() - lo));
    fr.resize(nr, len);
    fc.resize(nc, len);
    for (Eigen::Index k = 0; k < len; ++k) {
      const TrajectoryResult& r = results[idx[lo + static_cast<std::size_t>(k)]];
      const double log_w = std::log(r.weight);
      for (Eigen::Index i = 0; i < nr; ++i) fr(i, k) = std::exp(log_w + row_exponent(rows[i], r));
      for (Eigen::Index j = 0; j < nc; ++j) fc(j, k) = std::exp(col_exponent(cols[j], r));
    }
    sum.noalias() += fr * fc.transpose();
  }
  return sum;
}

// exp(-2 (B - conj(alpha)) (A - alpha)) with alpha = X + iY factors as
// exp(-2 (B - X)(A - X)) * exp(-2 Y^2 - 2 i Y (A - B)).
Complex wigner_row(double x, const TrajectoryResult& r) {
  return -2.0 * (r.alpha_out_plus - x) * (r.alpha_out - x);
}
Complex wigner_col(double y, const TrajectoryResult& r) {
  return -2.0 * y * y - 2.0 * kI * y * (r.alpha_out - r.alpha_out_plus);
}

// <a|A><B*|b>/<B*|A> = exp(-a^2/2 - b^2/2 + a A + b B - B A) for real a, b.
Complex density_row(double a, const TrajectoryResult& r) {
  return -0.5 * a * a + a * r.alpha_out - r.alpha_out_plus * r.alpha_out;
}
Complex density_col(double b, const TrajectoryResult& r) { return -0.5 * b * b + b * r.alpha_out_plus; }

}  // namespace

QuadratureGrid QuadratureGrid::standard(double theta, double alpha0_abs) {
  const double extent = std::max(12.0, std::numbers::sqrt2 * alpha0_abs + 5.0);
  const bool is_p = std::abs(std::cos(theta)) < 1e-12;
  return {theta, Axis::symmetric(extent, 0.01, is_p ? AxisTag::QuadratureP : AxisTag::QuadratureX)};
}

WignerGrid WignerGrid::standard(double alpha0_abs, double h) {
  const double extent = alpha0_abs + 4.0;
  return {Axis::symmetric(extent, h, AxisTag::PhaseSpaceRe), Axis::symmetric(extent, h, AxisTag::PhaseSpaceIm)};
}

Complex quadrature_kernel_complex(double x, double theta, Complex alpha, Complex alpha_plus) {
  const Complex em = std::polar(1.0, -theta);
  const Complex ep = std::polar(1.0, theta);
  const Complex exponent = -x * x + std::numbers::sqrt2 * x * (em * alpha + ep * alpha_plus) -
                           0.5 * (em * em * alpha * alpha + ep * ep * alpha_plus * alpha_plus) - alpha_plus * alpha;
  return std::exp(exponent) / std::sqrt(std::numbers::pi);
}

double quadrature_kernel(double x, double theta, Complex alpha, Complex alpha_plus) {
  return quadrature_kernel_complex(x, theta, alpha, alpha_plus).real();
}

GridField p_distribution(std::span<const TrajectoryResult> results, const QuadratureGrid& grid,
                         BranchFilter filter) {
  require_nonempty(results, "p_distribution");
  const auto idx = selected(results, filter);
  const Complex em = std::polar(1.0, -grid.theta);
  const Complex ep = std::polar(1.0, grid.theta);
  const double inv_n = 1.0 / (static_cast<double>(results.size()) * std::sqrt(std::numbers::pi));

  GridField field;
  field.axes = {grid.points};
  field.values = Eigen::ArrayXXd::Zero(grid.points.count, 1);
  for (Eigen::Index k = 0; k < grid.points.count; ++k) {
    const double x = grid.points.at(k);
    Complex acc{};
    for (std::size_t i : idx) {
      const TrajectoryResult& r = results[i];
      const Complex a = r.alpha_out, ap = r.alpha_out_plus;
      const Complex exponent = std::log(r.weight) - x * x + std::numbers::sqrt2 * x * (em * a + ep * ap) -
                               0.5 * (em * em * a * a + ep * ep * ap * ap) - ap * a;
      acc += std::exp(exponent);
    }
    acc *= inv_n;
    field.values(k, 0) = acc.real();
    field.imag_residual = std::max(field.imag_residual, std::abs(acc.imag()));
  }
  return field;
}

GridField wigner_estimate(std::span<const TrajectoryResult> results, const WignerGrid& grid, BranchFilter filter) {
  require_nonempty(results, "wigner_estimate");
  const auto idx = selected(results, filter);
  const Eigen::MatrixXcd sum =
      separable_sum(results, idx, grid.re.points(), grid.im.points(), wigner_row, wigner_col);
  const double scale = 2.0 / (std::numbers::pi * static_cast<double>(results.size()));
  GridField field;
  field.axes = {grid.re, grid.im};
  field.values = scale * sum.real().array();
  field.imag_residual = scale * sum.imag().cwiseAbs().maxCoeff();
  return field;
}

double wigner_negativity(const GridField& field) {
  if (field.rank() != 2) throw InvalidParameter("wigner_negativity needs a 2-D field");
  GridField negative{field.axes, (-field.values).max(0.0), 0.0};
  return negative.integrate();
}

std::size_t balanced_block_count(std::size_t n_samples, std::size_t max_blocks) {
  if (n_samples == 0 || max_blocks == 0) return 1;
  const std::size_t base = n_samples % 4 == 0 ? n_samples / 4 : n_samples;
  for (std::size_t k = std::min(max_blocks, base); k > 1; --k)
    if (base % k == 0) return k;
  return 1;
}

NegativityEstimate wigner_negativity_jackknife(std::span<const TrajectoryResult> results, const WignerGrid& grid,
                                               std::size_t blocks) {
  require_nonempty(results, "wigner_negativity_jackknife");
  if (blocks < 2 || blocks > results.size()) throw InvalidParameter("jackknife needs 2 <= blocks <= N");
  const Eigen::ArrayXd xs = grid.re.points();
  const Eigen::ArrayXd ys = grid.im.points();
  const double n = static_cast<double>(results.size());

  std::vector<Eigen::ArrayXXd> block_sums(blocks);
  std::vector<double> block_counts(blocks, 0.0);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(xs.size(), ys.size());
  for (std::size_t k = 0; k < blocks; ++k) {
    std::vector<std::size_t> idx;
    for (std::size_t i = k; i < results.size(); i += blocks) {
      block_counts[k] += 1.0;
      if (results[i].weight != 0.0) idx.push_back(i);
    }
    const Eigen::MatrixXcd s = separable_sum(results, idx, xs, ys, wigner_row, wigner_col);
    total += s;
    block_sums[k] = s.real().array();
  }

  const double scale = 2.0 / std::numbers::pi;
  NegativityEstimate est;
  est.blocks = blocks;
  est.wigner.axes = {grid.re, grid.im};
  est.wigner.values = (scale / n) * total.real().array();
  est.wigner.imag_residual = (scale / n) * total.imag().cwiseAbs().maxCoeff();
  est.negativity = wigner_negativity(est.wigner);

  const Eigen::ArrayXXd total_real = total.real().array();
  std::vector<double> leave_out(blocks);
  GridField partial{est.wigner.axes, {}, 0.0};
  for (std::size_t k = 0; k < blocks; ++k) {
    partial.values = (scale / (n - block_counts[k])) * (total_real - block_sums[k]);
    leave_out[k] = wigner_negativity(partial);
  }
  double mean = 0.0;
  for (double v : leave_out) mean += v;
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double v : leave_out) ss += (v - mean) * (v - mean);
  const double kb = static_cast<double>(blocks);
  est.standard_error = std::sqrt((kb - 1.0) / kb * ss);
  return est;
}

GridField reconstruct_density(std::span<const TrajectoryResult> results, const Axis& a_axis, const Axis& b_axis,
                              BranchFilter filter) {
  require_nonempty(results, "reconstruct_density");
  const auto idx = selected(results, filter);
  const Eigen::MatrixXcd sum = separable_sum(results, idx, a_axis.points(), b_axis.points(), density_row, density_col);
  GridField field;
  field.axes = {a_axis, b_axis};
  field.values = sum.cwiseAbs().array() / static_cast<double>(results.size());
  return field;
}

Complex density_element(std::span<const TrajectoryResult> results, double a, double b, BranchFilter filter) {
  require_nonempty(results, "density_element");
  Complex acc{};
  for (const auto& r : results) {
    if (r.weight == 0.0 || !keep(filter, r.branch)) continue;
    acc += std::exp(std::log(r.weight) + density_row(a, r) + density_col(b, r));
  }
  return acc / static_cast<double>(results.size());
}

VarianceEstimate p_variance(std::span<const TrajectoryResult> results) {
  require_nonempty(results, "p_variance");
  Complex m1{}, mp1{}, m2{}, mp2{}, mpa{};
  for (const auto& r : results) {
    const Complex a = r.alpha_out, ap = r.alpha_out_plus;
    m1 += r.weight * a;
    mp1 += r.weight * ap;
    m2 += r.weight * a * a;
    mp2 += r.weight * ap * ap;
    mpa += r.weight * ap * a;
  }
  const double inv = 1.0 / static_cast<double>(results.size());
  m1 *= inv;
  mp1 *= inv;
  m2 *= inv;
  mp2 *= inv;
  mpa *= inv;
  const Complex p2 = -0.5 * (m2 + mp2 - 2.0 * mpa - 1.0);
  const Complex p1 = (m1 - mp1) / (kI * std::numbers::sqrt2);
  VarianceEstimate v;
  v.mean_p = p1.real();
  v.variance = p2.real() - v.mean_p * v.mean_p;
  v.imag_residual = std::max(std::abs(p2.imag()), std::abs(p1.imag()));
  return v;
}

bool is_mixture_falsified(double variance) {
  if (!(variance >= 0.0)) throw InvalidParameter("variance must be >= 0");
  return variance < 0.5;
}

double fringe_contrast(const GridField& p_full, const GridField& p_envelope, double half_width) {
  if (p_full.rank() != 1 || p_envelope.rank() != 1 || p_full.values.rows() != p_envelope.values.rows())
    throw InvalidParameter("fringe_contrast needs two 1-D fields on the same grid");
  const Axis& axis = p_full.axes[0];
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index k = 0; k < axis.count; ++k) {
    if (std::abs(axis.at(k)) > half_width) continue;
    const double env = p_envelope.values(k, 0);
    if (!(env > 0.0)) continue;
    const double r = p_full.values(k, 0) / env;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!(hi >= lo)) throw DomainError("fringe_contrast: no grid points with a positive envelope");
  return (hi - lo) / (hi + lo);
}

}  // namespace catmem
