#ifndef CATMEM_GRID_FIELD_HPP
#define CATMEM_GRID_FIELD_HPP

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace catmem {

enum class AxisTag { QuadratureX, QuadratureP, PhaseSpaceRe, PhaseSpaceIm, CoherentA, CoherentB };

[[nodiscard]] std::string to_string(AxisTag tag);

/// Uniform axis: point k sits at min + k * step.
struct Axis {
  double min = 0.0;
  double step = 1.0;
  Eigen::Index count = 0;
  AxisTag tag = AxisTag::QuadratureX;

  [[nodiscard]] double at(Eigen::Index k) const { return min + static_cast<double>(k) * step; }
  [[nodiscard]] double max() const { return at(count - 1); }
  [[nodiscard]] Eigen::ArrayXd points() const;

  /// Symmetric axis over [-extent, extent] with spacing no larger than max_step.
  static Axis symmetric(double extent, double max_step, AxisTag tag);
  static Axis span(double lo, double hi, double step, AxisTag tag);
};

/// A real function tabulated on a 1-D or 2-D uniform grid.
///
/// values(i, j) holds the sample at (axes[0].at(i), axes[1].at(j)); 1-D fields
/// have a single column.
struct GridField {
  std::vector<Axis> axes;
  Eigen::ArrayXXd values;
  /// Largest |Im| of the estimator before the real part was taken.
  double imag_residual = 0.0;

  [[nodiscard]] std::size_t rank() const { return axes.size(); }
  [[nodiscard]] bool all_finite() const { return values.allFinite(); }

  /// Trapezoidal integral over the whole grid.
  [[nodiscard]] double integrate() const;

  /// Header comment lines (without "# ") are emitted first.
  void write_csv(std::ostream& os, const std::vector<std::string>& comments = {}) const;
  void write_json(std::ostream& os) const;
};

/// Trapezoid weights (1/2 at both ends) times the spacing.
[[nodiscard]] Eigen::ArrayXd trapezoid_weights(const Axis& axis);

}  // namespace catmem

#endif  // CATMEM_GRID_FIELD_HPP
