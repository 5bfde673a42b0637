#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "kinop/diagnostics.hpp"
#include "kinop/equilibria.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace kinop;
using doctest::Approx;

namespace {

Grid2D uniform_box(double a_lo, double a_hi, Eigen::Index rows, Eigen::Index cols) {
  const double value = 1.0 / ((a_hi - a_lo) * 2.0);
  return Grid2D(a_lo, a_hi, Eigen::ArrayXXd::Constant(rows, cols, value));
}

// Beta cell averages computed by the quadrature oracle.
Grid1D oracle_cells(double b1, double b2, Eigen::Index n) {
  Grid1D g = Grid1D::opinion(n);
  const Eigen::ArrayXd e = g.edges();
  for (Eigen::Index i = 0; i < n; ++i) g.values(i) = oracle::beta_mass(b1, b2, e(i), e(i + 1)) / g.dx();
  return g;
}

}  // namespace

TEST_CASE("macros of the uniform box") {
  const ModelParams p;  // omega_p 0.8, eps 0.05, gamma 1
  for (const Eigen::Index rows : {40, 5, 7}) {
    const Macros m = compute_macros(uniform_box(-2, 2, rows, 30), p);
    CAPTURE(rows);
    CHECK(m.rho_a == Approx(0.25).epsilon(1e-13));
    CHECK(m.rho_u == Approx(0.5).epsilon(1e-13));
    CHECK(m.rho_i == Approx(0.25).epsilon(1e-13));
    CHECK(std::abs(m.rho_a + m.rho_u + m.rho_i - 1.0) <= 1e-10);
    CHECK(std::abs(m.m_w) <= 1e-15);
    CHECK(std::abs(m.m_A) <= 1e-15);
  }
  // The weight is evaluated at cell centers, exact for edges aligned with +-gamma.
  CHECK(compute_macros(uniform_box(-2, 2, 40, 30), p).rho_bar == Approx(0.45).epsilon(1e-13));
}

TEST_CASE("macros of an ensemble") {
  const ModelParams p;
  Ensemble e;
  e.agents.assign(10, AgentState{0.3, 2.0 * p.gamma});
  const Macros m = compute_macros(e, p);
  CHECK(m.rho_a == 1.0);
  CHECK(m.rho_u == 0.0);
  CHECK(m.m_w == Approx(0.3).epsilon(1e-15));
  CHECK(m.m_A == Approx(2.0));
  CHECK(m.rho_bar == Approx(0.85));

  gen::Gen g(71);
  Ensemble r;
  for (int i = 0; i < 1001; ++i) r.agents.push_back({g.uniform(-1, 1), g.uniform(-3, 3)});
  r.agents.push_back({0.0, 1.0});   // exactly gamma counts as active
  r.agents.push_back({0.0, -1.0});  // exactly -gamma counts as inactive
  const Macros mr = compute_macros(r, p);
  CHECK(mr.rho_a + mr.rho_u + mr.rho_i == 1.0);
  CHECK(std::abs(mr.m_w) <= 1.0);
  CHECK(std::abs(mr.m_bar) <= mr.rho_bar);
}

TEST_CASE("macros of the marginals") {
  ModelParams p;
  const Grid1D h = normalized(project_density(Axis::Opinion, -1, 1, 50, [](double w) { return 1 + w; }));
  const Macros mh = compute_macros_h(h, p);
  CHECK(mh.rho_a == 1.0);
  // Cell-center first moment of a linear density: 1/3 - dw^2/12.
  CHECK(mh.m_w == Approx(1.0 / 3.0 - h.dx() * h.dx() / 12.0).epsilon(1e-12));
  CHECK(mh.rho_bar == Approx(0.85));
  CHECK(std::isnan(mh.m_A));
  const Grid1D g = normalized(Grid1D(Axis::Activity, -2, 2, Eigen::ArrayXd::Ones(40)));
  const Macros mg = compute_macros_g(g, p);
  CHECK(mg.rho_a == Approx(0.25));
  CHECK(mg.rho_bar == Approx(0.45));
  CHECK(std::isnan(mg.m_w));
  CHECK(std::abs(mg.m_A) <= 1e-15);
}

TEST_CASE("functionals vanish on identical inputs") {
  gen::Gen g(72);
  const Grid1D h = g.smooth_density(120);
  CHECK(relative_entropy(h, h) == 0.0);
  CHECK(hellinger(h, h) == 0.0);
  CHECK(entropy_production(h, h) == 0.0);
  CHECK(l1_distance(h, h) == 0.0);
}

TEST_CASE("disjoint supports") {
  Grid1D a = Grid1D::opinion(10), b = Grid1D::opinion(10);
  a.values.head(5).setConstant(1.0);
  b.values.tail(5).setConstant(1.0);
  CHECK(hellinger(a, b) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(relative_entropy(a, b) == std::numeric_limits<double>::infinity());
  CHECK(l1_distance(a, b) == Approx(2.0));
}

TEST_CASE("functionals reject mismatched grids") {
  const Grid1D a = Grid1D::opinion(10), b = Grid1D::opinion(12);
  CHECK_THROWS_AS(l1_distance(a, b), DomainError);
  CHECK_THROWS_AS(relative_entropy(a, b), DomainError);
  CHECK_THROWS_AS(hellinger(a, b), DomainError);
  CHECK_THROWS_AS(entropy_production(a, b), DomainError);
}

TEST_CASE("Beta references use exact cell masses") {
  gen::Gen g(73);
  for (int c = 0; c < 10; ++c) {
    const double b1 = g.uniform(0.2, 8), b2 = g.uniform(0.2, 8);
    const Grid1D h = g.smooth_density(64);
    const BetaEquilibrium eq(b1, b2);
    const Grid1D ref = oracle_cells(b1, b2, 64);
    CAPTURE(c);
    CHECK(l1_distance(h, eq) == Approx(l1_distance(h, ref)).epsilon(1e-9));
    CHECK(relative_entropy(h, eq) == Approx(relative_entropy(h, ref)).epsilon(1e-9));
    CHECK(hellinger(h, eq) == Approx(hellinger(h, ref)).epsilon(1e-9));
    CHECK(entropy_production(h, eq) == Approx(entropy_production(h, ref)).epsilon(1e-8));
  }
}

TEST_CASE("L1 distance is a metric on random triples") {
  gen::Gen g(74);
  for (int c = 0; c < 300; ++c) {
    const Eigen::Index n = g.integer(5, 200);
    const Grid1D a = g.rough_density(n), b = g.smooth_density(n), d = g.rough_density(n);
    CAPTURE(c);
    CHECK(l1_distance(a, d) <= l1_distance(a, b) + l1_distance(b, d) + 1e-14);
    CHECK(l1_distance(a, b) == l1_distance(b, a));
  }
}

TEST_CASE("Pinsker, Hellinger and entropy production inequalities on random pairs") {
  gen::Gen g(75);
  for (int c = 0; c < 200; ++c) {
    const Eigen::Index n = g.integer(50, 400);
    const Grid1D h = c % 3 == 0 ? g.rough_density(n) : g.smooth_density(n);
    const double b1 = g.uniform(0.1, 20);
    const double b2 = g.uniform(std::max(0.1, 1.0 - b1), 20);
    const Grid1D ref = BetaEquilibrium(b1, b2).cell_averages(n);
    const double l1 = l1_distance(h, ref), H = relative_entropy(h, ref), D = hellinger(h, ref);
    CAPTURE(c);
    CHECK(l1 * l1 <= 2.0 * H + 1e-8);
    CHECK(l1 <= 2.0 * D + 1e-8);
    CHECK(D <= std::sqrt(2.0) + 1e-12);
    const double I = entropy_production(h, ref);
    CHECK(I >= 0.0);
    if (c % 3 != 0) CHECK(D * D <= 0.5 * I + 1e-8);
  }
}

TEST_CASE("fit_rate on synthetic series") {
  std::vector<double> t, e, p;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i + 1.0);
    e.push_back(3.0 * std::exp(-0.4 * t.back()));
    p.push_back(2.0 * std::pow(t.back(), -0.5));
  }
  const FitResult fe = fit_rate(t, e, RateModel::Exponential);
  CHECK(fe.rate == Approx(0.4).epsilon(1e-12));
  CHECK(fe.r2 == Approx(1.0).epsilon(1e-12));
  CHECK(fe.intercept == Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fe.slope_stderr <= 1e-10);
  CHECK(fe.points == 81);
  const FitResult fp = fit_rate(t, p, RateModel::Power, 0.0);
  CHECK(fp.rate == Approx(-0.5).epsilon(1e-12));
  CHECK(fp.r2 == Approx(1.0).epsilon(1e-12));
  CHECK(fp.points == 101);

  std::vector<double> bad = e;
  bad[90] = 0.0;
  CHECK_THROWS_AS(fit_rate(t, bad, RateModel::Exponential), DomainError);
  CHECK_THROWS_AS(fit_rate({1, 2, 3}, {1, 2, 3}, RateModel::Exponential, 0.0), DomainError);
  CHECK_THROWS_AS(fit_rate({0, 1, 2}, {1, 2}, RateModel::Exponential), DomainError);
}

TEST_CASE("fit_rate standard error matches an independent regression") {
  gen::Gen g(76);
  std::vector<double> t, v, x, y;
  for (int i = 0; i < 60; ++i) {
    t.push_back(i * 0.5);
    v.push_back(std::exp(-0.3 * t.back() + g.uniform(-0.05, 0.05)));
  }
  const FitResult f = fit_rate(t, v, RateModel::Exponential, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    x.push_back(t[i]);
    y.push_back(std::log(v[i]));
  }
  const double slope = oracle::ls_slope(x, y);
  CHECK(f.rate == Approx(-slope).epsilon(1e-12));
  CHECK(std::abs(f.rate - 0.3) <= 4.0 * f.slope_stderr);
}

TEST_CASE("closed-form mean opinion") {
  ModelParams p;
  p.lambda_l = 0.5;
  p.omega_l = 0.75;
  p.eps_floor = 0.05;
  p.mu_l = 0.5;
  CHECK(mean_opinion_closed_form(0.0, -0.5, p) == -0.5);
  CHECK(mean_opinion_closed_form(1e3, -0.5, p) == Approx(0.5).epsilon(1e-15));
  CHECK(mean_opinion_closed_form(1.0, -0.5, p) == Approx(0.5 - std::exp(-0.4)).epsilon(1e-15));
  CHECK(mean_opinion_closed_form(1.0, -0.5, p) == Approx(-0.1703).epsilon(1e-3));
}

TEST_CASE("relative entropy of the global to the local equilibrium decays with the mean") {
  // Along m_w(t) the local state approaches the global one. H is quadratic in
  // m_w - mu_l, so the bound eta e^{-tau t} with tau = lambda_l (omega_l + eps)
  // holds with room to spare and the fitted exponent is 2 tau.
  ModelParams p;
  p.mu_l = 0.2;
  const double tau = beta_rate(p);
  const Eigen::Index n = 400;
  const Grid1D h_inf = global_equilibrium_h(p, Channels::Both).cell_averages(n);
  std::vector<double> t, H;
  for (int k = 0; k <= 60; ++k) {
    t.push_back(0.25 * k);
    const double m = mean_opinion_closed_form(t.back(), -0.6, p);
    H.push_back(relative_entropy(h_inf, local_equilibrium_h(m, p).cell_averages(n)));
  }
  const double eta = H.front();
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(H[k] <= eta * std::exp(-tau * t[k]) * (1 + 1e-12));
  const FitResult f = fit_rate(t, H, RateModel::Exponential);
  CHECK(f.rate >= tau);
  CHECK(std::abs(f.rate - 2.0 * tau) <= 0.1 * 2.0 * tau);
}
