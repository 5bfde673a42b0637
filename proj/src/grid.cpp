#include "kinop/grid.hpp"

#include <cmath>

#include "kinop/errors.hpp"

namespace kinop {

Grid1D::Grid1D(Axis axis_, double lo_, double hi_, Eigen::ArrayXd values_)
    : axis(axis_), lo(lo_), hi(hi_), values(std::move(values_)) {
  if (!(hi > lo)) throw ConfigError("grid: hi must exceed lo");
  if (values.size() == 0) throw ConfigError("grid: at least one cell required");
}

Grid1D Grid1D::opinion(Eigen::Index n) { return Grid1D(Axis::Opinion, -1.0, 1.0, Eigen::ArrayXd::Zero(n)); }

Eigen::ArrayXd Grid1D::centers() const {
  const double d = dx();
  return Eigen::ArrayXd::LinSpaced(size(), 0.0, static_cast<double>(size() - 1)) * d + (lo + 0.5 * d);
}

Eigen::ArrayXd Grid1D::edges() const {
  return Eigen::ArrayXd::LinSpaced(size() + 1, 0.0, static_cast<double>(size())) * dx() + lo;
}

double Grid1D::mean() const { return (centers() * values).sum() / values.sum(); }

bool Grid1D::same_cells(const Grid1D& o) const {
  return axis == o.axis && size() == o.size() && std::abs(lo - o.lo) <= 1e-12 * (1.0 + std::abs(lo)) &&
         std::abs(hi - o.hi) <= 1e-12 * (1.0 + std::abs(hi));
}

ActivityAxis make_activity_axis(double lo, double hi, double gamma, int cells_per_gamma) {
  if (cells_per_gamma < 1) throw ConfigError("cells_per_gamma must be >= 1");
  if (!(hi > lo)) throw ConfigError("activity range: hi must exceed lo");
  const double d = gamma / cells_per_gamma;
  const double i_lo = std::floor(lo / d + 1e-9);
  const double i_hi = std::ceil(hi / d - 1e-9);
  return {i_lo * d, i_hi * d, static_cast<Eigen::Index>(i_hi - i_lo)};
}

Grid1D project_density(Axis axis, double lo, double hi, Eigen::Index n,
                       const std::function<double(double)>& f) {
  static const double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                              0.8611363115940526};
  static const double wt[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};
  Grid1D g(axis, lo, hi, Eigen::ArrayXd::Zero(n));
  const double d = g.dx();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = lo + (static_cast<double>(i) + 0.5) * d;
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += wt[k] * f(c + 0.5 * d * x[k]);
    g.values[i] = 0.5 * s;
  }
  return g;
}

Grid1D normalized(Grid1D g) {
  const double m = g.mass();
  if (!(m > 0.0)) throw DomainError("cannot normalize a grid of zero mass");
  g.values /= m;
  return g;
}

Grid2D::Grid2D(double a_lo_, double a_hi_, Eigen::ArrayXXd values_)
    : a_lo(a_lo_), a_hi(a_hi_), values(std::move(values_)) {
  if (!(a_hi > a_lo)) throw ConfigError("grid: a_hi must exceed a_lo");
}

Eigen::ArrayXd Grid2D::a_centers() const {
  const double d = dA();
  return Eigen::ArrayXd::LinSpaced(rows(), 0.0, static_cast<double>(rows() - 1)) * d + (a_lo + 0.5 * d);
}

Eigen::ArrayXd Grid2D::w_centers() const {
  const double d = dw();
  return Eigen::ArrayXd::LinSpaced(cols(), 0.0, static_cast<double>(cols() - 1)) * d + (-1.0 + 0.5 * d);
}

Grid1D Grid2D::opinion_marginal() const {
  return Grid1D(Axis::Opinion, -1.0, 1.0, values.colwise().sum().transpose() * dA());
}

Grid1D Grid2D::activity_marginal() const {
  return Grid1D(Axis::Activity, a_lo, a_hi, values.rowwise().sum() * dw());
}

Grid2D product_density(const Grid1D& g, const Grid1D& h) {
  return Grid2D(g.lo, g.hi, (g.values.matrix() * h.values.matrix().transpose()).array());
}

}  // namespace kinop
