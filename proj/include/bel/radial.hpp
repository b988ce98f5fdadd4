#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bel {

enum class Spacing { uniform, geometric };

/// Strictly increasing radii on [r_min, r_max] with at least 16 nodes.
class RadialGrid {
 public:
  static constexpr std::size_t min_nodes = 16;

  /// Validates and adopts an explicit node set.
  RadialGrid(std::vector<double> nodes, Spacing spacing);

  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  double r_min() const { return nodes_.front(); }
  double r_max() const { return nodes_.back(); }
  Spacing spacing() const { return spacing_; }

  /// Local step: the larger of the two adjacent intervals.
  double step(std::size_t i) const;
  /// Largest interval among nodes with r <= r_end.
  double max_step(double r_end) const;

  /// Index i of the interval [nodes[i], nodes[i+1]] containing r (clamped).
  std::size_t locate(double r) const;
  /// First index with nodes[i] >= r.
  std::size_t lower_index(double r) const;
  bool contains(double r) const { return r >= r_min() && r <= r_max(); }

 private:
  std::vector<double> nodes_;
  Spacing spacing_;
};

/// Uniform grids have a constant step. Geometric grids with r_min > 0 use a
/// constant ratio between consecutive nodes; with r_min == 0 the steps grow
/// geometrically, r_i = (q^i - 1) with q fixed by r_max, so the pole region is
/// resolved at unit length scale and the tail at constant relative step.
RadialGrid make_grid(double r_min, double r_max, std::size_t n, Spacing kind);

/// Callback returning the value (order 0) or a derivative (order 1..3) at r.
using AnalyticFn = std::function<double(double r, int order)>;

/// Scalar function of the geodesic radius sampled on a grid. Derivatives come
/// from an analytic callback when present, otherwise from sampled derivative
/// arrays, otherwise from finite differences.
class RadialFunction {
 public:
  static constexpr int max_order = 3;

  RadialFunction(RadialGrid grid, std::vector<double> values);

  /// Samples fn on the grid; derivatives up to `analytic_order` are served by fn.
  static RadialFunction analytic(RadialGrid grid, AnalyticFn fn, int analytic_order = max_order);

  /// Attaches sampled derivative arrays (order 1, 2, 3 in sequence).
  RadialFunction with_derivatives(std::vector<double> d1, std::vector<double> d2 = {},
                                  std::vector<double> d3 = {}) const;

  const RadialGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  bool has_analytic(int order) const { return static_cast<bool>(fn_) && order <= analytic_order_; }
  bool has_samples(int order) const;
  int analytic_order() const { return fn_ ? analytic_order_ : -1; }

  /// Derivative samples of the given order at every node (order 0 returns values).
  std::vector<double> samples(int order) const;

  /// Value or derivative at an arbitrary radius inside the grid.
  double at(double r, int order = 0) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
  std::array<std::vector<double>, max_order> derivs_{};
  AnalyticFn fn_;
  int analytic_order_ = 0;
};

/// Finite-difference weights (Fornberg) for derivatives 0..max_deriv at z.
/// Result is indexed [derivative][node].
std::vector<std::vector<double>> fd_weights(double z, std::span<const double> x, int max_deriv);

/// Central differences on interior nodes, one-sided second-order stencils at
/// the ends. Throws insufficient-nodes if the grid is too short for `order`.
/// A nonzero `width` selects a wider centred stencil (clamped at the ends).
std::vector<double> differentiate_samples(const RadialGrid& grid, std::span<const double> values, int order,
                                          std::size_t width = 0);
RadialFunction differentiate(const RadialFunction& f, int order);

/// F(r) = integral from r_min to r of the samples. Each interval is integrated
/// with the quadratic through its neighbours (averaging the two available fits
/// on interior intervals), which is exact for quadratics on any grid.
std::vector<double> integrate_cumulative_samples(const RadialGrid& grid, std::span<const double> values);
std::vector<double> integrate_cumulative_samples(std::span<const double> nodes, std::span<const double> values);
/// Corrected trapezoid rule using integrand derivatives; exact for cubics.
std::vector<double> integrate_hermite_samples(const RadialGrid& grid, std::span<const double> values,
                                              std::span<const double> derivs);
/// The result carries the integrand as its first-derivative samples.
RadialFunction integrate_cumulative(const RadialFunction& f);

/// Default "equals" tolerance for O(h^2) quantities at node i: 10 h_i^2.
double grid_tolerance(const RadialGrid& grid, std::size_t i, double factor = 10.0);

/// Surface area of the unit sphere S^{d-1}.
double unit_sphere_area(int d);

}  // namespace bel
