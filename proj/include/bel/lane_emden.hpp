#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bel/geometry.hpp"

namespace bel {

enum class Nonlinearity { lane_emden, liouville };
enum class SolveStatus { global_positive, crossed_zero, truncated };

/// Radial solution of -Lu = N(u) with u(0) = ell, u'(0) = 0, N(u) = u^p or e^u.
struct SolutionProfile {
  ModelManifold manifold;
  Nonlinearity kind = Nonlinearity::lane_emden;
  double p = 0.0;  ///< exponent; unused for Liouville
  double ell = 0.0;
  double tol = 0.0;
  RadialFunction u;        ///< derivative samples: u', u''
  RadialFunction u_prime;  ///< derivative samples: u'', u'''
  SolveStatus status = SolveStatus::global_positive;
  double r_end = 0.0;           ///< crossing radius r*, or the last node reached
  double u_prime_at_end = 0.0;  ///< u'(r_end)
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  /// "global-positive", "crossed-zero-at(r*)" or "truncated-at(r)".
  std::string status_string() const;
  double nonlinearity(double value) const;
  /// F with F' = N, the potential in the energy.
  double potential(double value) const;
};

struct SolverOptions {
  double tol = 1e-10;
  double max_step = 0.0;  ///< 0 means unbounded
};

/// Critical Sobolev exponent (d+2)/(d-2), d >= 3.
double critical_exponent(int d);

/// Series handoff radius max(1e-4, 1e-2 * first grid step).
double series_handoff_radius(const RadialGrid& grid);

/// Dormand-Prince 5(4) shooting from the series start. Output values sit
/// exactly on grid nodes r <= r_max (every node is a step endpoint).
/// Lane-Emden runs stop at the first zero of u; Liouville runs never do.
SolutionProfile solve_radial(const ModelManifold& m, double p, double ell, double r_max,
                             SolverOptions opts = {});
SolutionProfile solve_liouville(const ModelManifold& m, double ell, double r_max, SolverOptions opts = {});

/// E_u = u'^2/2 + F(u).
double energy(const SolutionProfile& s, double r);
/// P_u = W E_u + w u u'/(p+1), with w = e^{-f} psi^{d-1} and W its integral.
double pohozaev(const ModelManifold& m, const SolutionProfile& s, double r);
/// K = (1/2 + 1/(p+1)) w - (w'/w) W, so that P_u' = K u'^2. Throws
/// monotonicity-violated when w' <= 0 at r.
double pohozaev_slope_factor(const ModelManifold& m, double p, double r);
/// Node samples of (a - (d-1)/d) w + ((d-1)/d) Lr int_0^r w X / (Lr)^2 with
/// X = Ric^r + 2 psi' f'/psi - f'^2/(d-1); equal to K on any model.
std::vector<double> pohozaev_slope_factor_decomposed(const ModelManifold& m, double p);

struct PohozaevTrace {
  std::vector<double> r;
  std::vector<double> energy;
  std::vector<double> pohozaev;
  std::vector<double> slope_factor;
  std::vector<double> slope_factor_decomposed;  ///< filled for weights built from the warping
  double decomposition_gap = 0.0;               ///< max |K - K_decomposed| / max(1, |K|)
  bool K_nonpositive = false;
  bool P_nonpositive = false;
  bool E_decreasing = false;
  double max_K = 0.0;
  double max_P = 0.0;
};

/// Evaluated on profile nodes r >= series radius. The sign verdicts allow
/// K <= k_tol max(1, a w) and P <= p_tol max(1, |W E| + |w u u'|/(p+1)),
/// i.e. the slack is relative once the summands exceed 1.
PohozaevTrace pohozaev_trace(const SolutionProfile& s, double k_tol = 1e-8, double p_tol = 1e-8,
                             Exec exec = Exec::parallel);

/// -(d-1) psi''/psi + f'' + 2 psi' f'/psi - f'^2/(d-1) on nodes r >= series radius.
std::vector<double> positivity_quantity(const ModelManifold& m);
/// True iff positivity_quantity <= 10 h_i^2 at every node.
bool positivity_criterion(const ModelManifold& m);

struct BoundCheck {
  std::vector<double> r;
  std::vector<double> bound;
  std::vector<bool> holds;
  bool all = false;
  double max_excess = 0.0;  ///< max of u - bound
};

/// u(r) <= (C r^2 + ell^{1-p})^{-1/(p-1)} at every profile node, with `slack` absolute tolerance.
BoundCheck asymptotic_bound_check(const SolutionProfile& s, double C, double slack = 0.0);

/// Residuals at interior nodes: (w u')' + w N(u), with the derivative by finite differences.
std::vector<double> divergence_form_residual(const SolutionProfile& s);

/// Runs independent Lane-Emden solves; failures come back as empty optionals.
std::vector<std::optional<SolutionProfile>> solve_many(const ModelManifold& m, const std::vector<double>& p,
                                                       const std::vector<double>& ell, double r_max,
                                                       SolverOptions opts = {}, Exec exec = Exec::parallel);

}  // namespace bel
