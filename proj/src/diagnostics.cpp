#include "kinop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinop {

Macros compute_macros(const Ensemble& ens, const ModelParams& p) {
  Macros m;
  m.t = ens.time;
  const double n = static_cast<double>(ens.agents.size());
  std::size_t active = 0, inactive = 0;
  for (const AgentState& s : ens.agents) {
    if (s.A >= p.gamma) ++active;
    else if (s.A <= -p.gamma) ++inactive;
    const double q = activity_weight(s.A, p.gamma) * p.omega_p + p.eps_floor;
    m.m_w += s.w;
    m.m_A += s.A;
    m.rho_bar += q;
    m.m_bar += q * s.w;
  }
  m.rho_a = static_cast<double>(active) / n;
  m.rho_i = static_cast<double>(inactive) / n;
  m.rho_u = static_cast<double>(ens.agents.size() - active - inactive) / n;
  m.m_w /= n;
  m.m_A /= n;
  m.rho_bar /= n;
  m.m_bar /= n;
  return m;
}

namespace {

// Fractions of [lo, hi] below -gamma, between, and above gamma.
void region_fractions(double lo, double hi, double gamma, double& f_i, double& f_u, double& f_a) {
  const double len = hi - lo;
  f_i = std::clamp((-gamma - lo) / len, 0.0, 1.0);
  f_a = std::clamp((hi - gamma) / len, 0.0, 1.0);
  f_u = 1.0 - f_i - f_a;
}

}  // namespace

Macros compute_macros(const Grid2D& f, const ModelParams& p, double t) {
  Macros m;
  m.t = t;
  const Eigen::ArrayXd row_mass = f.values.rowwise().sum() * f.dw() * f.dA();
  const Eigen::ArrayXd row_first = (f.values.matrix() * f.w_centers().matrix()).array() * f.dw() * f.dA();
  const Eigen::ArrayXd a = f.a_centers();
  const double total = row_mass.sum();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    double fi, fu, fa;
    region_fractions(a[i] - 0.5 * f.dA(), a[i] + 0.5 * f.dA(), p.gamma, fi, fu, fa);
    m.rho_i += fi * row_mass[i];
    m.rho_u += fu * row_mass[i];
    m.rho_a += fa * row_mass[i];
    const double q = activity_weight(a[i], p.gamma) * p.omega_p + p.eps_floor;
    m.rho_bar += q * row_mass[i];
    m.m_bar += q * row_first[i];
  }
  m.m_w = row_first.sum() / total;
  m.m_A = (a * row_mass).sum() / total;
  m.rho_a /= total;
  m.rho_u /= total;
  m.rho_i /= total;
  m.rho_bar /= total;
  m.m_bar /= total;
  return m;
}

Macros compute_macros_h(const Grid1D& h, const ModelParams& p, double t) {
  Macros m;
  m.t = t;
  m.rho_a = 1.0;
  m.m_w = h.mean();
  m.m_A = std::numeric_limits<double>::quiet_NaN();
  m.rho_bar = p.omega_p + p.eps_floor;
  m.m_bar = m.rho_bar * m.m_w;
  return m;
}

Macros compute_macros_g(const Grid1D& g, const ModelParams& p, double t) {
  Macros m;
  m.t = t;
  const Eigen::ArrayXd a = g.centers();
  const double total = g.values.sum();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double fi, fu, fa;
    region_fractions(a[i] - 0.5 * g.dx(), a[i] + 0.5 * g.dx(), p.gamma, fi, fu, fa);
    m.rho_i += fi * g.values[i];
    m.rho_u += fu * g.values[i];
    m.rho_a += fa * g.values[i];
    m.rho_bar += (activity_weight(a[i], p.gamma) * p.omega_p + p.eps_floor) * g.values[i];
  }
  m.rho_a /= total;
  m.rho_u /= total;
  m.rho_i /= total;
  m.rho_bar /= total;
  m.m_A = (a * g.values).sum() / total;
  m.m_w = std::numeric_limits<double>::quiet_NaN();
  m.m_bar = std::numeric_limits<double>::quiet_NaN();
  return m;
}

namespace {

void require_same(const Grid1D& a, const Grid1D& b) {
  if (!a.same_cells(b)) throw DomainError("grids differ: functionals need matching cells");
}

}  // namespace

double relative_entropy(const Grid1D& h, const Grid1D& ref) {
  require_same(h, ref);
  double s = 0.0;
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    if (h.values[j] <= 0.0) continue;
    if (ref.values[j] <= 0.0) return std::numeric_limits<double>::infinity();
    s += h.values[j] * std::log(h.values[j] / ref.values[j]);
  }
  return s * h.dx();
}

double relative_entropy(const Grid1D& h, const BetaEquilibrium& ref) {
  return relative_entropy(h, ref.cell_averages(h.size()));
}

double hellinger(const Grid1D& h, const Grid1D& ref) {
  require_same(h, ref);
  return std::sqrt((h.values.sqrt() - ref.values.sqrt()).square().sum() * h.dx());
}

double hellinger(const Grid1D& h, const BetaEquilibrium& ref) { return hellinger(h, ref.cell_averages(h.size())); }

double entropy_production(const Grid1D& h, const Grid1D& ref) {
  require_same(h, ref);
  const Eigen::Index n = h.size();
  const double dw = h.dx();
  double s = 0.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double r0 = ref.values[j], r1 = ref.values[j + 1];
    if (r0 <= 0.0 || r1 <= 0.0) continue;
    const double wm = h.lo + static_cast<double>(j + 1) * dw;
    const double du = (std::sqrt(h.values[j + 1] / r1) - std::sqrt(h.values[j] / r0)) / dw;
    s += (1.0 - wm * wm) * 0.5 * (r0 + r1) * du * du;
  }
  return 4.0 * s * dw;
}

double entropy_production(const Grid1D& h, const BetaEquilibrium& ref) {
  return entropy_production(h, ref.cell_averages(h.size()));
}

double l1_distance(const Grid1D& a, const Grid1D& b) {
  require_same(a, b);
  return (a.values - b.values).abs().sum() * a.dx();
}

double l1_distance(const Grid1D& a, const BetaEquilibrium& b) { return l1_distance(a, b.cell_averages(a.size())); }

FitResult fit_rate(const std::vector<double>& t, const std::vector<double>& value, RateModel model,
                   double discard_fraction) {
  if (t.size() != value.size()) throw DomainError("fit_rate: series lengths differ");
  if (t.empty()) throw DomainError("fit_rate: empty series");
  if (!(discard_fraction >= 0.0 && discard_fraction < 1.0)) throw DomainError("fit_rate: discard fraction in [0,1)");
  const double t0 = t.front(), t1 = t.back();
  const double cut = t0 + discard_fraction * (t1 - t0);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (discard_fraction > 0.0 && t[i] < cut) continue;
    if (!(value[i] > 0.0)) throw DomainError("fit_rate: values must be positive");
    if (model == RateModel::Power && !(t[i] > 0.0)) throw DomainError("fit_rate: power fit needs t > 0");
    x.push_back(model == RateModel::Power ? std::log(t[i]) : t[i]);
    y.push_back(std::log(value[i]));
  }
  const std::size_t n = x.size();
  if (n < 10) throw DomainError("fit_rate: at least 10 points required on the fit window");
  const Eigen::Map<const Eigen::ArrayXd> X(x.data(), static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::ArrayXd> Y(y.data(), static_cast<Eigen::Index>(n));
  const double mx = X.mean(), my = Y.mean();
  const double sxx = (X - mx).square().sum();
  const double sxy = ((X - mx) * (Y - my)).sum();
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  const double ss_res = (Y - (intercept + slope * X)).square().sum();
  const double ss_tot = (Y - my).square().sum();
  FitResult r;
  r.rate = model == RateModel::Exponential ? -slope : slope;
  r.intercept = intercept;
  r.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  r.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
  r.points = n;
  return r;
}

double mean_opinion_closed_form(double t, double m_in, const ModelParams& p) {
  return p.mu_l + (m_in - p.mu_l) * std::exp(-beta_rate(p) * t);
}

}  // namespace kinop
