#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "kinop/core.hpp"
#include "kinop/grid.hpp"

namespace kinop {

enum class MeanMode { ClosedForm, SelfConsistent };

// Opinion drift B(w) = kappa (w - center) + nonlocal(w) with diffusion (sigma2/2)(1 - w^2),
// for the no-flux equation  d_t h = d_w [ B h + d_w (Dif h) ].
// `nonlocal` is either empty or tabulated on the half grid of the target Grid1D:
// 2n-1 values at w_0, w_{1/2}, w_1, ..., w_{n-1}.
struct OpinionDrift {
  double sigma2 = 0.0;
  double kappa = 0.0;
  double center = 0.0;
  Eigen::ArrayXd nonlocal;
};

// Largest dt with dt * max|B| <= dw at the interior interfaces.
double drift_cfl_dt(const Grid1D& h, const OpinionDrift& drift);

// One backward-Euler Chang-Cooper step. Coefficients are frozen at the start of
// the step; the discrete operator is an M-matrix with zero column sums, so mass
// is conserved, positivity is preserved and the discrete Beta state is stationary.
// Throws SolverError on negative input or dt above drift_cfl_dt.
Grid1D cc_step_h(const Grid1D& h, const OpinionDrift& drift, double dt);

// Sum over interior interfaces of the agent-channel flux for drift alpha (w - c).
// Its root in c zeroes the rate of change of the discrete mean at h.
double agent_flux_sum(const Grid1D& h, double alpha, double sigma2, double c);
double self_consistent_center(const Grid1D& h, double alpha, double sigma2);

struct HOptions {
  double dt = 0.0;         // 0 selects the default of h_time_step
  long record_every = 1;   // steps between stored grids; 0 stores only the endpoints
  // Called with (step, t, center, h) at step 0 and after every step.
  std::function<void(long, double, double, const Grid1D&)> observer;
};

// Step size used by advance_h: `requested` (or a quarter of the drift CFL bound
// when it is 0), shrunk so that a whole number of steps reaches t_final.
double h_time_step(const Grid1D& h0, const ModelParams& params, Channels mode, double t_final,
                   double requested = 0.0);

struct HTrajectory {
  std::vector<double> t;
  std::vector<double> center;  // agent-channel center m_w used by each recorded step
  std::vector<Grid1D> h;
  double dt = 0.0;
  long steps = 0;
};

// Evolves the opinion marginal of the all-active reduced model. Agents: drift
// alpha (w - m_w), sigma_p^2; Leaders: beta (w - mu_l), sigma_l^2; Both: the sum,
// with sigma_p^2 + sigma_l^2. ClosedForm uses m_w(t) = mu_l + (m_0 - mu_l) e^{-beta t}
// (constant m_0 without leaders). SelfConsistent picks m_w each step so that the
// discrete mean is the backward-Euler solution of dm/dt = -beta (m - mu_l), and
// is conserved to roundoff without leaders.
HTrajectory advance_h(const Grid1D& h0, const ModelParams& params, Channels mode, MeanMode mean_mode,
                      double t_final, const HOptions& options = {});

// Piecewise-affine activity velocity with kinks at +-gamma,
// V(A) = lambda_A (weight(A) omega + eps - a), times (1 - theta) and minus
// theta lambda_c A / 2 when controlled.
class ActivityVelocity {
 public:
  ActivityVelocity(const ModelParams& params, Channels channels, bool controlled);

  double operator()(double A) const;
  template <typename Derived>
  Eigen::ArrayXd operator()(const Eigen::ArrayBase<Derived>& A) const {
    return A.unaryExpr([this](double a) { return (*this)(a); });
  }
  // Exact flow map X_t(A0); negative t runs the flow backward.
  double flow(double A0, double t) const;
  double gamma() const { return gamma_; }
  double slope(int piece) const { return slope_[piece]; }
  double offset(int piece) const { return offset_[piece]; }

 private:
  int piece_of(double A, double v) const;
  double gamma_;
  double slope_[3];
  double offset_[3];
};

// Exact controlled trajectory. Throws InfeasibleControl unless lambda_c lies in
// the admissible interval.
double characteristics_g(double A0, const ModelParams& params, double t);

// Largest stable dt for the upwind activity step: dA / max |V| over cells with
// positive mass.
double activity_cfl_dt(const Grid1D& g, const ActivityVelocity& V);

// Conservative upwind step of d_t g + d_A (V g) = 0 with cell-centered velocities.
// When mass sits in a boundary cell with outward velocity the axis is first
// extended symmetrically, so no mass leaves the domain.
Grid1D transport_step_g(const Grid1D& g, const ActivityVelocity& V, double dt);
Grid1D transport_step_g(const Grid1D& g, const ModelParams& params, bool controlled, double dt,
                        Channels channels = Channels::Agents);

// Exact solution at time t obtained by transporting the initial CDF along the
// flow: the mass of [a,b] is G0(X_{-t}(b)) - G0(X_{-t}(a)). The axis is widened
// to contain the image of the initial one.
Grid1D advance_g_exact(const Grid1D& g0, const ActivityVelocity& V, double t);

// K[f](w) by quadrature over the grid; equals w rho_bar - m_bar for unit influence.
double eval_nonlocal_K(const Grid2D& f, const InteractionKernels& kernels, const ModelParams& params, double w);

struct FStepLimits {
  double opinion_dt;
  double activity_dt;
};
FStepLimits split_step_limits(const Grid2D& f, const ModelParams& params, const InteractionKernels& kernels,
                              Channels channels, bool controlled);

// Strang step: half opinion step per activity row, full upwind activity step per
// opinion column, half opinion step. Leaders act as a point mass at mu_l.
Grid2D split_step_f(const Grid2D& f, const ModelParams& params, const InteractionKernels& kernels,
                    Channels channels, bool controlled, double dt);

}  // namespace kinop
