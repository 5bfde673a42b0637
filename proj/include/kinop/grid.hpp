#pragma once

#include <Eigen/Core>

#include <functional>

namespace kinop {

enum class Axis { Opinion, Activity };

// Cell-averaged density on a uniform grid of [lo, hi].
struct Grid1D {
  Axis axis = Axis::Opinion;
  double lo = -1.0;
  double hi = 1.0;
  Eigen::ArrayXd values;

  Grid1D() = default;
  Grid1D(Axis axis, double lo, double hi, Eigen::ArrayXd values);

  // Zero density on n opinion cells covering [-1,1].
  static Grid1D opinion(Eigen::Index n);

  Eigen::Index size() const { return values.size(); }
  double dx() const { return (hi - lo) / static_cast<double>(values.size()); }
  Eigen::ArrayXd centers() const;
  Eigen::ArrayXd edges() const;
  double mass() const { return values.sum() * dx(); }
  // First moment divided by mass.
  double mean() const;
  bool same_cells(const Grid1D& other) const;
};

// Activity axis whose edges are integer multiples of gamma/cells_per_gamma,
// so that +-gamma are always cell edges.
struct ActivityAxis {
  double lo;
  double hi;
  Eigen::Index n;
};
ActivityAxis make_activity_axis(double lo, double hi, double gamma, int cells_per_gamma);

// Cell averages of f over n cells of [lo, hi] by 4-point Gauss-Legendre per cell.
Grid1D project_density(Axis axis, double lo, double hi, Eigen::Index n,
                       const std::function<double(double)>& f);

// Rescales values to unit mass.
Grid1D normalized(Grid1D g);

// Cell-averaged f(A, w): rows are activity cells, columns opinion cells on [-1,1].
struct Grid2D {
  double a_lo = -1.0;
  double a_hi = 1.0;
  Eigen::ArrayXXd values;

  Grid2D() = default;
  Grid2D(double a_lo, double a_hi, Eigen::ArrayXXd values);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  double dA() const { return (a_hi - a_lo) / static_cast<double>(values.rows()); }
  double dw() const { return 2.0 / static_cast<double>(values.cols()); }
  Eigen::ArrayXd a_centers() const;
  Eigen::ArrayXd w_centers() const;
  double mass() const { return values.sum() * dA() * dw(); }
  // h(w) = integral over A.
  Grid1D opinion_marginal() const;
  // g(A) = integral over w.
  Grid1D activity_marginal() const;
};

// Product density g(A) h(w) with both factors given as grids.
Grid2D product_density(const Grid1D& g, const Grid1D& h);

}  // namespace kinop
