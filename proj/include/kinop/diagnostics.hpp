#pragma once

#include <vector>

#include "kinop/core.hpp"
#include "kinop/equilibria.hpp"
#include "kinop/grid.hpp"
#include "kinop/macros.hpp"
#include "kinop/mc.hpp"

namespace kinop {

// Active: A >= gamma; inactive: A <= -gamma; undecided in between.
Macros compute_macros(const Ensemble& ens, const ModelParams& params);
// Cell quadrature; cells straddling +-gamma are split by overlap length.
Macros compute_macros(const Grid2D& f, const ModelParams& params, double t = 0.0);
// Opinion marginal of an all-active population; m_A is not defined (NaN).
Macros compute_macros_h(const Grid1D& h, const ModelParams& params, double t = 0.0);
// Activity marginal alone; opinion moments are not defined (NaN).
Macros compute_macros_g(const Grid1D& g, const ModelParams& params, double t = 0.0);

// Sum h log(h/ref) dw; +infinity when h > 0 on a cell where ref = 0.
double relative_entropy(const Grid1D& h, const Grid1D& ref);
double relative_entropy(const Grid1D& h, const BetaEquilibrium& ref);

// (sum (sqrt h - sqrt ref)^2 dw)^(1/2), in [0, sqrt 2] for unit masses.
double hellinger(const Grid1D& h, const Grid1D& ref);
double hellinger(const Grid1D& h, const BetaEquilibrium& ref);

// 4 sum (1 - w^2) ref (d_w sqrt(h/ref))^2 dw over interior interfaces.
double entropy_production(const Grid1D& h, const Grid1D& ref);
double entropy_production(const Grid1D& h, const BetaEquilibrium& ref);

// Throws DomainError when the grids differ.
double l1_distance(const Grid1D& a, const Grid1D& b);
double l1_distance(const Grid1D& a, const BetaEquilibrium& b);

enum class RateModel { Exponential, Power };

struct FitResult {
  double rate;       // decay rate for Exponential, exponent for Power
  double intercept;  // of log(value) against t or log t
  double r2;
  double slope_stderr;
  std::size_t points;
};

// Least squares of log(value) against t (Exponential, rate = -slope) or log t
// (Power, rate = slope) after discarding the leading `discard_fraction` of the
// time horizon. Throws DomainError on nonpositive values or fewer than 10 points.
FitResult fit_rate(const std::vector<double>& t, const std::vector<double>& value, RateModel model,
                   double discard_fraction = 0.2);

// mu_l + (m_in - mu_l) e^{-lambda_l (omega_l + eps) t}.
double mean_opinion_closed_form(double t, double m_in, const ModelParams& params);

}  // namespace kinop
