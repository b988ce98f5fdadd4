#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bel/check.hpp"
#include "bel/lane_emden.hpp"

namespace bel {

/// psi(r) = alpha r + (1 - alpha) r / sqrt(r^2 + 1) with analytic derivatives to order 3.
RadialFunction explicit_warping(const RadialGrid& grid, double alpha);

/// Default grid for the counterexample: geometric on [0, 1000] with 4096 nodes.
RadialGrid example_grid();

struct ExampleManifold {
  ModelManifold manifold;
  double alpha;
  double f0;
};

/// Explicit concave warping plus the weight it induces. Requires d >= 3 and 0 < alpha < 1.
ExampleManifold build_example(int d, double alpha, double f0 = 0.0, const RadialGrid& grid = example_grid());

struct ConditionReport {
  bool i = false;    ///< Ric^r_inf > 0 for r > 0
  bool ii = false;   ///< Ric^theta_inf > 0 for r > 0
  bool iii = false;  ///< Ric^r_inf <= -2 psi' f'/psi + f'^2/(d-1)
  double min_ric_r = 0.0;
  double min_ric_theta = 0.0;
  double max_iii_slack = 0.0;         ///< max of Ric^r + 2 psi' f'/psi - f'^2/(d-1) (should be <= 0)
  double max_weight_residual = 0.0;   ///< max |f'' + 2 psi' f'/psi - (d-1) psi''/psi|
  double weight_residual_ratio = 0.0; ///< max of that residual over 100 h_i^2
};

/// Pointwise verification on nodes r >= 3 h_0. Throws invalid-manifold for
/// weights that were not built from the warping.
ConditionReport condition_checks(const ModelManifold& m, Exec exec = Exec::parallel);

struct TheoremReport {
  int d = 0;
  double alpha = 0.0;
  double p = 0.0;
  double ell = 0.0;
  std::optional<SolutionProfile> profile;
  std::string solver_status;
  std::string solver_error;

  // Properties of the constructed manifold and solution.
  bool warping_invariants = false;     ///< psi(0)=0, psi'>0, alpha r < psi < r
  bool volume_comparison = false;      ///< C1 alpha^{d-1} R^d/d <= mu(B_R)/|S| <= C2 R^d/d
  bool sharp_laplacian_fails = false;  ///< r Lr > d-1 at every sampled node
  bool rough_laplacian_holds = false;  ///< Lr <= (d-1)/(alpha^2 r) + 1e-8
  bool center_value = false;           ///< u(0) = ell
  bool u_decreasing = false;           ///< u' < 0 for r > 0
  bool drift_alignment = false;        ///< f' u' > 0 for r > 0
  bool asymptotic_bound = false;       ///< u <= (C r^2 + ell^{1-p})^{-1/(p-1)}
  bool global_positive = false;

  bool ric_nonnegative = false;
  bool ric_positive = false;
  ConditionReport conditions;
  bool K_nonpositive = false;
  bool P_nonpositive = false;
  bool chi_positive = false;       ///< chi(r) > 0 and chi' > 0 for r > 0
  bool psi_cap_positive = false;   ///< Psi > 0 for r > 0 and non-decreasing
  bool f_prime_negative = false;
  bool f_prime_slope = false;      ///< f'(r)/r -> (d-1) psi'''(0)/3 near 0
  bool f_bounded = false;          ///< |int_0^r psi'' psi| grows slower than r^{1/2}

  double C1 = 0.0;
  double C2 = 0.0;
  double bound_constant = 0.0;
  double rough_constant = 0.0;
  double max_K = 0.0;
  double max_P = 0.0;
  double min_chi = 0.0;
  double max_bound_excess = 0.0;
  double f_sup_deviation = 0.0;
  double inner_tail_exponent = 0.0;
  double f_prime_slope_error = 0.0;
  /// Nodes where chi' > (psi'-1)^2 holds; recorded only (the inequality runs the other way).
  std::size_t chi_derivative_dominance_nodes = 0;
  double K_decomposition_gap = 0.0;

  bool all_passed() const;
  std::vector<Check> checks() const;
};

/// Solves the radial equation on the example and assembles every flag; solver
/// failures are recorded in the report rather than thrown.
TheoremReport verify_theorem(const ExampleManifold& ex, double p, double ell, SolverOptions opts = {},
                             Exec exec = Exec::parallel);

}  // namespace bel
