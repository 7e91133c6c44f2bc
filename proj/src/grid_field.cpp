#include "catmem/grid_field.hpp"

#include "catmem/core_model.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>

namespace catmem {

std::string to_string(AxisTag tag) {
  switch (tag) {
    case AxisTag::QuadratureX: return "x";
    case AxisTag::QuadratureP: return "p";
    case AxisTag::PhaseSpaceRe: return "re_alpha";
    case AxisTag::PhaseSpaceIm: return "im_alpha";
    case AxisTag::CoherentA: return "a";
    case AxisTag::CoherentB: return "b";
  }
  return "axis";
}

Eigen::ArrayXd Axis::points() const {
  Eigen::ArrayXd p(count);
  for (Eigen::Index k = 0; k < count; ++k) p[k] = at(k);
  return p;
}

Axis Axis::symmetric(double extent, double max_step, AxisTag tag) {
  if (!(extent > 0.0) || !(max_step > 0.0)) throw InvalidParameter("axis extent and step must be > 0");
  const auto half = static_cast<Eigen::Index>(std::ceil(extent / max_step - 1e-9));
  return Axis{-extent, extent / static_cast<double>(half), 2 * half + 1, tag};
}

Axis Axis::span(double lo, double hi, double step, AxisTag tag) {
  if (!(hi > lo) || !(step > 0.0)) throw InvalidParameter("axis needs hi > lo and step > 0");
  const auto intervals = static_cast<Eigen::Index>(std::llround((hi - lo) / step));
  return Axis{lo, (hi - lo) / static_cast<double>(intervals), intervals + 1, tag};
}

Eigen::ArrayXd trapezoid_weights(const Axis& axis) {
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(axis.count, axis.step);
  if (axis.count > 1) {
    w[0] *= 0.5;
    w[axis.count - 1] *= 0.5;
  }
  return w;
}

double GridField::integrate() const {
  const Eigen::ArrayXd wx = trapezoid_weights(axes.at(0));
  if (rank() == 1) return (values.col(0) * wx).sum();
  const Eigen::ArrayXd wy = trapezoid_weights(axes.at(1));
  return (wx.matrix().transpose() * values.matrix() * wy.matrix()).value();
}

void GridField::write_csv(std::ostream& os, const std::vector<std::string>& comments) const {
  for (const auto& c : comments) os << "# " << c << '\n';
  os << std::setprecision(17);
  if (rank() == 1) {
    os << to_string(axes[0].tag) << ",value\n";
    for (Eigen::Index i = 0; i < values.rows(); ++i) os << axes[0].at(i) << ',' << values(i, 0) << '\n';
    return;
  }
  os << to_string(axes[0].tag) << ',' << to_string(axes[1].tag) << ",value\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      os << axes[0].at(i) << ',' << axes[1].at(j) << ',' << values(i, j) << '\n';
}

void GridField::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["axes"] = nlohmann::json::array();
  for (const auto& a : axes)
    j["axes"].push_back({{"name", to_string(a.tag)}, {"min", a.min}, {"step", a.step}, {"count", a.count}});
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index jj = 0; jj < values.cols(); ++jj) flat.push_back(values(i, jj));
  j["values"] = std::move(flat);
  j["imag_residual"] = imag_residual;
  os << j.dump() << '\n';
}

}  // namespace catmem
