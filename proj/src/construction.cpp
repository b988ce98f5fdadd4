#include "bel/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bel/error.hpp"

namespace bel {

RadialFunction explicit_warping(const RadialGrid& grid, double alpha) {
  return RadialFunction::analytic(grid, [alpha](double r, int k) {
    const double s = 1.0 + r * r;
    const double b = 1.0 - alpha;
    switch (k) {
      case 0: return alpha * r + b * r / std::sqrt(s);
      case 1: return alpha + b * std::pow(s, -1.5);
      case 2: return -3.0 * b * r * std::pow(s, -2.5);
      default: return -3.0 * b * (1.0 - 4.0 * r * r) * std::pow(s, -3.5);
    }
  });
}

RadialGrid example_grid() { return make_grid(0.0, 1000.0, 4096, Spacing::geometric); }

ExampleManifold build_example(int d, double alpha, double f0, const RadialGrid& grid) {
  if (d < 3) throw Error(ErrorKind::invalid_dimension, "the example needs d >= 3");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::invalid_alpha, "alpha must lie in (0, 1)");
  auto psi = explicit_warping(grid, alpha);
  auto f = weight_from_warping(psi, d, f0);
  return {ModelManifold(d, std::move(psi), std::move(f), true), alpha, f0};
}

ConditionReport condition_checks(const ModelManifold& m, Exec exec) {
  if (!m.weight_from_warping()) {
    throw Error(ErrorKind::invalid_manifold, "condition checks apply to weights built from the warping");
  }
  const int d = m.dimension();
  const auto& g = m.grid();
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto p2 = m.psi_nodes(2);
  const auto f1 = m.f_nodes(1);
  const auto f2 = m.f_nodes(2);
  const std::size_t first = m.first_regular_index();
  const std::size_t count = g.size() - first;
  std::vector<double> ric_r(count), ric_t(count), slack(count), resid(count), ratio(count);
  for_each_index(count, exec, [&](std::size_t j) {
    const std::size_t i = first + j;
    ric_r[j] = -(d - 1) * p2[i] / p0[i] + f2[i];
    ric_t[j] = -p2[i] * p0[i] + (d - 2) * (1.0 - p1[i] * p1[i]) + p0[i] * p1[i] * f1[i];
    slack[j] = ric_r[j] + 2.0 * p1[i] * f1[i] / p0[i] - f1[i] * f1[i] / (d - 1);
    resid[j] = std::abs(f2[i] + 2.0 * p1[i] / p0[i] * f1[i] - (d - 1) * p2[i] / p0[i]);
    ratio[j] = resid[j] / grid_tolerance(g, i, 100.0);
  });
  ConditionReport c;
  c.min_ric_r = *std::min_element(ric_r.begin(), ric_r.end());
  c.min_ric_theta = *std::min_element(ric_t.begin(), ric_t.end());
  c.max_iii_slack = *std::max_element(slack.begin(), slack.end());
  c.max_weight_residual = *std::max_element(resid.begin(), resid.end());
  c.weight_residual_ratio = *std::max_element(ratio.begin(), ratio.end());
  c.i = c.min_ric_r > 0.0;
  c.ii = c.min_ric_theta > 0.0;
  c.iii = c.max_iii_slack <= 0.0 && c.weight_residual_ratio <= 1.0;
  return c;
}

TheoremReport verify_theorem(const ExampleManifold& ex, double p, double ell, SolverOptions opts, Exec exec) {
  const ModelManifold& m = ex.manifold;
  const int d = m.dimension();
  if (!(p >= critical_exponent(d) * (1 - 1e-14))) {
    throw Error(ErrorKind::invalid_exponent, "the construction needs p >= (d+2)/(d-2)");
  }
  if (!(ell > 0.0)) throw Error(ErrorKind::nonpositive_ell, "center value must be positive");
  const double alpha = ex.alpha;
  const auto& g = m.grid();
  const std::size_t n = g.size();
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto f0 = m.f_nodes(0);
  const auto f1 = m.f_nodes(1);

  TheoremReport t;
  t.d = d;
  t.alpha = alpha;
  t.p = p;
  t.ell = ell;

  // Warping invariants and the volume sandwich.
  t.warping_invariants = p0[0] == 0.0 && std::abs(p1[0] - 1.0) < 1e-12;
  for (std::size_t i = 1; i < n; ++i) {
    t.warping_invariants = t.warping_invariants && p1[i] > 0.0 && alpha * g[i] < p0[i] && p0[i] < g[i];
  }
  t.C1 = std::numeric_limits<double>::infinity();
  t.C2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t.C1 = std::min(t.C1, std::exp(-f0[i]));
    t.C2 = std::max(t.C2, std::exp(-f0[i]));
  }
  const auto W = m.volume_integral().values();
  t.volume_comparison = true;
  for (std::size_t i = 1; i < n; ++i) {
    const double rd = std::pow(g[i], d) / d;
    const double slack = 1e-10 * rd * t.C2;
    t.volume_comparison = t.volume_comparison && W[i] <= t.C2 * rd + slack &&
                          W[i] >= t.C1 * std::pow(alpha, d - 1) * rd - slack;
  }

  // Laplacian comparison: sharp form fails, rough form with (d-1)/alpha^2 holds.
  const auto comp = comparison_report(m, g.r_max(), exec);
  t.rough_constant = comp.rough_constant;
  t.sharp_laplacian_fails = true;
  t.rough_laplacian_holds = true;
  for (std::size_t j = 0; j < comp.r.size(); ++j) {
    const double r = comp.r[j];
    t.sharp_laplacian_fails = t.sharp_laplacian_fails && r * comp.laplacian[j] > d - 1;
    t.rough_laplacian_holds = t.rough_laplacian_holds && comp.laplacian[j] <= (d - 1) / (alpha * alpha * r) + 1e-8;
  }

  // Curvature and the three enumerated conditions.
  t.conditions = condition_checks(m, exec);
  const auto curv = curvature_report(m, std::nullopt, exec);
  t.ric_positive = curv.min_ric_r_inf > 0.0 && curv.min_ric_theta_inf > 0.0;
  t.ric_nonnegative = curv.min_ric_r_inf >= 0.0 && curv.min_ric_theta_inf >= 0.0;

  // chi = int_0^r (psi' - psi/s)^2 ds. Three-point Gauss-Legendre per interval
  // has positive weights, so every increment keeps the sign of the integrand.
  auto defect = [&m](double s) {
    const double q = m.psi(s, 1) - m.psi(s) / s;
    return q * q;
  };
  static constexpr double gx = 0.7745966692414834;
  std::vector<double> chi_d(n, 0.0), chi(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    chi_d[i] = defect(g[i]);
    const double mid = 0.5 * (g[i - 1] + g[i]);
    const double half = 0.5 * (g[i] - g[i - 1]);
    chi[i] = chi[i - 1] + half * (5.0 * defect(mid - gx * half) + 8.0 * defect(mid) + 5.0 * defect(mid + gx * half)) / 9.0;
  }
  t.chi_positive = true;
  t.min_chi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) {
    t.chi_positive = t.chi_positive && chi[i] > 0.0 && chi_d[i] > 0.0;
    t.min_chi = std::min(t.min_chi, chi[i]);
    const double e = p1[i] - 1.0;
    if (chi_d[i] > e * e) ++t.chi_derivative_dominance_nodes;
  }

  // Psi = (d-2)(1 - psi'^2) + psi psi' f'.
  t.psi_cap_positive = true;
  double prev = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double cap = (d - 2) * (1.0 - p1[i] * p1[i]) + p0[i] * p1[i] * f1[i];
    t.psi_cap_positive = t.psi_cap_positive && cap > 0.0 && cap >= prev - 1e-12 * std::abs(prev);
    prev = cap;
  }

  // Weight: f' < 0, slope at the pole, boundedness.
  t.f_prime_negative = true;
  for (std::size_t i = 1; i < n; ++i) t.f_prime_negative = t.f_prime_negative && f1[i] < 0.0;
  const double slope = (d - 1) / 3.0 * m.psi(0.0, 3);
  t.f_prime_slope_error = 0.0;
  for (std::size_t i = 1; i < n && g[i] <= 1e-2; ++i) {
    t.f_prime_slope_error = std::max(t.f_prime_slope_error, std::abs(f1[i] / g[i] - slope) / std::abs(slope));
  }
  t.f_prime_slope = t.f_prime_slope_error < 1e-3;
  for (std::size_t i = 0; i < n; ++i) t.f_sup_deviation = std::max(t.f_sup_deviation, std::abs(f0[i] - ex.f0));
  std::vector<double> inner(n);
  for (std::size_t i = 0; i < n; ++i) inner[i] = f1[i] * p0[i] * p0[i] / (d - 1);
  t.inner_tail_exponent = log_log_slope(g.nodes(), inner, g.r_max() / 10.0, g.r_max());
  t.f_bounded = std::isfinite(t.f_sup_deviation) && t.inner_tail_exponent < 0.5;

  // The solution.
  t.bound_constant = (p - 1.0) / (2.0 * d) * (t.C1 / t.C2) * std::pow(alpha, d - 1);
  try {
    t.profile = solve_radial(m, p, ell, g.r_max(), opts);
  } catch (const Error& e) {
    t.solver_error = e.what();
    t.solver_status = "error";
    return t;
  }
  const SolutionProfile& s = *t.profile;
  t.solver_status = s.status_string();
  t.global_positive = s.status == SolveStatus::global_positive;
  t.center_value = s.u[0] == ell;
  t.u_decreasing = true;
  t.drift_alignment = true;
  for (std::size_t i = 1; i < s.u.size(); ++i) {
    t.u_decreasing = t.u_decreasing && s.u_prime[i] < 0.0;
    t.drift_alignment = t.drift_alignment && f1[i] * s.u_prime[i] > 0.0;
  }
  const auto bound = asymptotic_bound_check(s, t.bound_constant, 10.0 * opts.tol * std::max(1.0, ell));
  t.asymptotic_bound = bound.all && t.global_positive;
  t.max_bound_excess = bound.max_excess;
  try {
    const auto trace = pohozaev_trace(s, 1e-8, 1e-8, exec);
    t.K_nonpositive = trace.K_nonpositive;
    t.P_nonpositive = trace.P_nonpositive;
    t.max_K = trace.max_K;
    t.max_P = trace.max_P;
    t.K_decomposition_gap = trace.decomposition_gap;
  } catch (const Error& e) {
    t.solver_error = e.what();
  }
  return t;
}

bool TheoremReport::all_passed() const { return all_pass(checks()); }

std::vector<Check> TheoremReport::checks() const {
  const double inf = std::numeric_limits<double>::infinity();
  return {
      {"warping-invariants", "psi(0)=0, psi'>0, alpha r < psi(r) < r", warping_invariants, 0.0, 0.0},
      {"volume-comparison", "C1 alpha^(d-1) R^d/d <= int_0^R e^-f psi^(d-1) <= C2 R^d/d", volume_comparison, C2,
       1e-10},
      {"sharp-laplacian-fails", "r Lr > d-1 for r > 0", sharp_laplacian_fails, rough_constant, 0.0},
      {"rough-laplacian-holds", "Lr <= (d-1)/(alpha^2 r)", rough_laplacian_holds, rough_constant, 1e-8},
      {"center-value", "u(0) = ell", center_value, profile ? profile->u[0] : 0.0, 0.0},
      {"u-decreasing", "u' < 0 for r > 0", u_decreasing, 0.0, 0.0},
      {"drift-alignment", "f' u' > 0 for r > 0", drift_alignment, 0.0, 0.0},
      {"asymptotic-bound", "u <= (C r^2 + ell^(1-p))^(-1/(p-1)), C = (p-1)/(2d) (C1/C2) alpha^(d-1)",
       asymptotic_bound, max_bound_excess, 0.0},
      {"global-positive", "u > 0 on [0, r_max]", global_positive, profile ? profile->r_end : 0.0, 0.0},
      {"ric-positive", "Ric^r_inf > 0 and Ric^theta_inf > 0 for r >= 3h", ric_positive,
       std::min(conditions.min_ric_r, conditions.min_ric_theta), 0.0},
      {"condition-i", "0 < Ric^r_inf", conditions.i, conditions.min_ric_r, 0.0},
      {"condition-ii", "0 < Ric^theta_inf", conditions.ii, conditions.min_ric_theta, 0.0},
      {"condition-iii", "Ric^r_inf <= -2 psi' f'/psi + f'^2/(d-1); residual of f''+2(psi'/psi)f'=(d-1)psi''/psi",
       conditions.iii, conditions.weight_residual_ratio, 1.0},
      {"pohozaev-slope-nonpositive", "K = (1/2+1/(p+1)) w - (w'/w) W <= 0", K_nonpositive, max_K, 1e-8},
      {"pohozaev-nonpositive", "P_u = W E_u + w u u'/(p+1) <= 0", P_nonpositive, max_P, 1e-8},
      {"chi-positive", "chi = int_0^r (psi' - psi/s)^2 > 0", chi_positive, min_chi, 0.0},
      {"psi-cap-positive", "(d-2)(1-psi'^2) + psi psi' f' > 0, non-decreasing", psi_cap_positive, 0.0, 0.0},
      {"weight-decreasing", "f' < 0 for r > 0", f_prime_negative, 0.0, 0.0},
      {"weight-slope-at-pole", "f'(r) = ((d-1)/3) psi'''(0) r + o(r)", f_prime_slope, f_prime_slope_error, 1e-3},
      {"weight-bounded", "int_0^r psi'' psi = o(r^(1/2))", f_bounded, inner_tail_exponent, 0.5},
      {"solver", "radial shooting completed", solver_error.empty(), solver_error.empty() ? 0.0 : inf, 0.0},
  };
}

}  // namespace bel
