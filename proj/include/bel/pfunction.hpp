#pragma once

#include <vector>

#include "bel/lane_emden.hpp"

namespace bel {

/// Virtual dimension n in [d, inf]; infinity is a distinct state, not a large number.
struct VirtualDimension {
  bool infinite = false;
  double value = 0.0;

  static VirtualDimension finite(double n) { return {false, n}; }
  static VirtualDimension infinity() { return {true, 0.0}; }
};

/// Aubin-Talenti profile (a + b r^2)^{-(d-2)/2}, a = 1/(d(d-2)b), on flat R^d,
/// with analytic derivatives to order 3.
SolutionProfile bubble(int d, double b, const RadialGrid& grid = make_grid(0.0, 1000.0, 4096, Spacing::geometric));
/// -2 log(a + b r^2), a = 1/(8b), on flat R^2.
SolutionProfile log_bubble(double b, const RadialGrid& grid = make_grid(0.0, 1000.0, 4096, Spacing::geometric));

/// Residual u'' + Lr u' + N(u) at every node (the r = 0 limit uses d u''(0)).
std::vector<double> equation_residual(const SolutionProfile& s);

struct PFunctionData {
  ModelManifold manifold;
  double m = 2.0;
  double c_m = 0.5;
  VirtualDimension n;
  RadialFunction v;  ///< derivatives up to order 3 (analytic or sampled)
  RadialFunction P;  ///< P = ((m/2) v'^2 + c_m) / v, with P' and P'' attached
};

/// v = u^{-(p-1)/2} (m = 2(p+1)/(p-1), c_m = 2/(m-2)) or v = e^{-u/2} (m = 2, c_m = 1/2).
/// Throws nonpositive-u when a Lane-Emden profile is not positive on its range.
/// By default n = d.
PFunctionData v_transform(const SolutionProfile& s, std::optional<VirtualDimension> n = std::nullopt);

/// Radial Hessian eigenvalues: v'' once and (psi'/psi) v' with multiplicity d-1.
struct HessianParts {
  double hessian_sq;   ///< ||Hess v||^2
  double traceless_sq; ///< ||Hess v - (Delta v / d) g||^2
  double laplacian;    ///< Delta v
  double drift_lap;    ///< L v
  double grad_f_v;     ///< f' v'
  double ric_r;        ///< Ric^r_inf
  double v1;           ///< v'
};
HessianParts hessian_parts(const PFunctionData& data, double r);

/// ||Hess v||^2 - (Lv)^2/m + Ric_inf(v', v').
double k_functional(const PFunctionData& data, double r);
/// Sum-of-squares form: traceless part + (m-n)/(mn) (Lv)^2 + (n-d)/(nd) (Lv + n/(n-d) f'v')^2 + Ric_{n,d} v'^2,
/// with the n = d and n = inf limits.
double k_decomposed(const PFunctionData& data, double r);
/// The three branches of W_f. Throws invalid-branch for finite n > d with m <= d.
double w_functional(const PFunctionData& data, double r);

/// |m v^{1-m} k - div_f(v^{2-m} P')| at nodes, with div_f X = X' + Lr X and X'
/// by finite differences; zero below the series radius.
RadialFunction divergence_identity_residual(const PFunctionData& data);

/// (1/2) P^{-1} v^{2-m} P'^2 + m v^{1-m} W_f - div_f(v^{2-m} P') at nodes r >= series
/// radius (should be <= 0 up to discretisation error).
std::vector<double> fundamental_inequality_slack(const PFunctionData& data);

/// phi_R = 1 on [0, R], 1 - S((r-R)/R) on [R, 2R] with S(t) = 6t^5 - 15t^4 + 10t^3, 0 beyond.
RadialFunction radial_cutoff(double R, const ModelManifold& m);

struct CutoffConstants {
  double gradient;      ///< max R |phi'|
  double gradient_sq;   ///< max R^2 phi'^2 / phi over phi > 0
  double drift_lap;     ///< max R^2 (-L phi)
};
CutoffConstants cutoff_constants(const RadialFunction& phi, const ModelManifold& m, double R);

/// Relative tolerance (residual / scale) for the integration-by-parts identity.
inline constexpr double ibp_tolerance = 1e-9;

struct IbpResidual {
  double lhs;
  double rhs;
  double residual;  ///< |lhs - rhs|
  double scale;     ///< sum of the absolute values of the three integrals
};
/// (m/2+1-q) int w v^{-q} v'^2 phi^2 + c_m int w v^{-q} phi^2 = -int w v^{1-q} v' (phi^2)',
/// phi = radial_cutoff(R), radial integrals with w = e^{-f} psi^{d-1}.
IbpResidual ibp_identity(const PFunctionData& data, double q, double R);

struct EstimateRatio {
  double lhs;
  double bound_factor;
  double ratio() const { return lhs / bound_factor; }
};
/// lhs = mu-integral over B_R of v^{-q}(v'^2 + 1) for 2 <= q < m/2+1, else of v^{-q};
/// bound_factor = mu(B_2R) R^{-q}. Requires 0 <= q <= m/2 + 1.
EstimateRatio integral_estimate_ratio(const PFunctionData& data, double q, double R);

/// [sup_{r<=R} (u'/u)^2] / [1/R^2 + sup_{r<=2R} u^{4/(n-2)}] over grid nodes.
double cheng_yau_ratio(const SolutionProfile& s, double n, double R);

struct FloorCheck {
  double A = 0.0;
  bool holds = false;
  double min_margin = 0.0;  ///< min over r >= R of u/(A r^{2-kappa}) - 1
};
/// Verifies L u <= 0 on the grid (else superharmonicity-violated), then
/// u(r) >= A r^{2-kappa} for nodes r >= R with A = R^{kappa-2} u(R).
FloorCheck superharmonic_floor_check(const SolutionProfile& s, double kappa, double R);

/// R-sweeps evaluated independently per radius.
std::vector<EstimateRatio> integral_estimate_sweep(const PFunctionData& data, double q, const std::vector<double>& radii,
                                                   Exec exec = Exec::parallel);
std::vector<double> cheng_yau_sweep(const SolutionProfile& s, double n, const std::vector<double>& radii,
                                    Exec exec = Exec::parallel);

/// Sweeps count as bounded when this least-squares log-log slope of the values
/// over radii in the final decade [r_last/10, r_last] stays at or below it.
inline constexpr double sweep_slope_tolerance = 0.1;
/// Slope of log(value) against log(R) over the final decade of a sweep.
/// Throws out-of-range unless the sweep spans a decade with positive values.
double sweep_tail_slope(const std::vector<double>& radii, const std::vector<double>& values);

/// Integral of fn over [a, b] with `panels` five-point Gauss-Legendre panels.
template <class Fn>
double gauss_integral(Fn&& fn, double a, double b, std::size_t panels);

}  // namespace bel

#include "bel/detail/gauss.hpp"
