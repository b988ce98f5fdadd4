#include "bel/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bel/error.hpp"

namespace bel {

RadialGrid::RadialGrid(std::vector<double> nodes, Spacing spacing)
    : nodes_(std::move(nodes)), spacing_(spacing) {
  if (nodes_.size() < min_nodes) {
    throw Error(ErrorKind::invalid_range,
                "grid needs at least 16 nodes, got " + std::to_string(nodes_.size()));
  }
  if (nodes_.front() < 0.0) throw Error(ErrorKind::invalid_range, "negative radius");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) {
      throw Error(ErrorKind::invalid_range, "nodes not strictly increasing at index " + std::to_string(i));
    }
  }
}

double RadialGrid::step(std::size_t i) const {
  const std::size_t n = nodes_.size();
  const double left = i > 0 ? nodes_[i] - nodes_[i - 1] : 0.0;
  const double right = i + 1 < n ? nodes_[i + 1] - nodes_[i] : 0.0;
  return std::max(left, right);
}

double RadialGrid::max_step(double r_end) const {
  double h = 0.0;
  for (std::size_t i = 1; i < nodes_.size() && nodes_[i - 1] < r_end; ++i) {
    h = std::max(h, nodes_[i] - nodes_[i - 1]);
  }
  return h;
}

std::size_t RadialGrid::locate(double r) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  if (it == nodes_.begin()) return 0;
  auto i = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
  return std::min(i, nodes_.size() - 2);
}

std::size_t RadialGrid::lower_index(double r) const {
  return static_cast<std::size_t>(
      std::distance(nodes_.begin(), std::lower_bound(nodes_.begin(), nodes_.end(), r)));
}

RadialGrid make_grid(double r_min, double r_max, std::size_t n, Spacing kind) {
  if (!(r_min >= 0.0) || !(r_min < r_max) || !std::isfinite(r_max)) {
    throw Error(ErrorKind::invalid_range, "require 0 <= r_min < r_max");
  }
  if (n < RadialGrid::min_nodes) {
    throw Error(ErrorKind::invalid_range, "require at least 16 nodes");
  }
  std::vector<double> nodes(n);
  const auto last = static_cast<double>(n - 1);
  if (kind == Spacing::uniform) {
    const double h = (r_max - r_min) / last;
    for (std::size_t i = 0; i < n; ++i) nodes[i] = r_min + h * static_cast<double>(i);
  } else if (r_min > 0.0) {
    const double log_ratio = std::log(r_max / r_min) / last;
    for (std::size_t i = 0; i < n; ++i) nodes[i] = r_min * std::exp(log_ratio * static_cast<double>(i));
  } else {
    const double log_q = std::log1p(r_max) / last;
    for (std::size_t i = 0; i < n; ++i) nodes[i] = std::expm1(log_q * static_cast<double>(i));
  }
  nodes.front() = r_min;
  nodes.back() = r_max;
  return RadialGrid(std::move(nodes), kind);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> fd_weights(double z, std::span<const double> x, int max_deriv) {
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(max_deriv);
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

// Stencil [first, first + width) clamped into the grid, centred on i when possible.
std::size_t stencil_start(std::size_t i, std::size_t width, std::size_t n) {
  const std::size_t half = width / 2;
  std::size_t first = i >= half ? i - half : 0;
  if (first + width > n) first = n - width;
  return first;
}

double stencil_apply(std::span<const double> nodes, std::span<const double> values, std::size_t first,
                     std::size_t width, double z, int order) {
  auto w = fd_weights(z, nodes.subspan(first, width), order);
  double acc = 0.0;
  for (std::size_t j = 0; j < width; ++j) acc += w[static_cast<std::size_t>(order)][j] * values[first + j];
  return acc;
}

}  // namespace

std::vector<double> differentiate_samples(const RadialGrid& grid, std::span<const double> values, int order,
                                          std::size_t width) {
  if (order < 1 || order > RadialFunction::max_order) {
    throw Error(ErrorKind::invalid_range, "derivative order must be 1..3");
  }
  const std::size_t n = grid.size();
  const auto uorder = static_cast<std::size_t>(order);
  if (n < uorder + 2) throw Error(ErrorKind::insufficient_nodes, "grid too short for derivative order");
  // Interior: 3-point central stencil for orders 1-2, 5-point for order 3.
  // Ends: order+2 one-sided points, which keeps second-order accuracy.
  const auto x = grid.nodes();
  std::vector<double> out(n);
  if (width > 0) {
    if (width < uorder + 1 || width > n) throw Error(ErrorKind::insufficient_nodes, "bad stencil width");
    for (std::size_t i = 0; i < n; ++i) out[i] = stencil_apply(x, values, stencil_start(i, width, n), width, x[i], order);
    return out;
  }
  const std::size_t central = order == 3 ? 5 : 3;
  const std::size_t one_sided = uorder + 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t half = central / 2;
    const bool interior = i >= half && i + half < n;
    const std::size_t width = interior ? central : one_sided;
    const std::size_t first = interior ? i - half : stencil_start(i, width, n);
    out[i] = stencil_apply(x, values, first, width, x[i], order);
  }
  return out;
}

RadialFunction differentiate(const RadialFunction& f, int order) {
  return RadialFunction(f.grid(), differentiate_samples(f.grid(), f.values(), order));
}

namespace {

// Integral over [a, b] of the quadratic interpolating (x[k], y[k]), k = 0..2.
double quadratic_piece(const double* x, const double* y, double a, double b) {
  double acc = 0.0;
  for (int j = 0; j < 3; ++j) {
    const int k = (j + 1) % 3;
    const int l = (j + 2) % 3;
    // Basis polynomial (t - xk)(t - xl) / ((xj - xk)(xj - xl)) in t = x - a.
    const double pk = x[k] - a;
    const double pl = x[l] - a;
    const double h = b - a;
    const double integral = h * h * h / 3.0 - (pk + pl) * h * h / 2.0 + pk * pl * h;
    acc += y[j] * integral / ((x[j] - x[k]) * (x[j] - x[l]));
  }
  return acc;
}

}  // namespace

std::vector<double> integrate_cumulative_samples(const RadialGrid& grid, std::span<const double> values) {
  return integrate_cumulative_samples(grid.nodes(), values);
}

std::vector<double> integrate_cumulative_samples(std::span<const double> nodes, std::span<const double> values) {
  const std::size_t n = nodes.size();
  if (n < 3 || values.size() != n) {
    throw Error(ErrorKind::insufficient_nodes, "cumulative quadrature needs at least 3 matching samples");
  }
  const double* x = nodes.data();
  const double* y = values.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = x[i];
    const double b = x[i + 1];
    double piece = 0.0;
    if (i == 0) {
      piece = quadratic_piece(x, y, a, b);
    } else if (i + 2 >= n) {
      piece = quadratic_piece(x + i - 1, y + i - 1, a, b);
    } else {
      piece = 0.5 * (quadratic_piece(x + i - 1, y + i - 1, a, b) + quadratic_piece(x + i, y + i, a, b));
    }
    out[i + 1] = out[i] + piece;
  }
  return out;
}

std::vector<double> integrate_hermite_samples(const RadialGrid& grid, std::span<const double> values,
                                              std::span<const double> derivs) {
  const std::size_t n = grid.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    out[i + 1] = out[i] + 0.5 * h * (values[i] + values[i + 1]) + h * h / 12.0 * (derivs[i] - derivs[i + 1]);
  }
  return out;
}

RadialFunction integrate_cumulative(const RadialFunction& f) {
  auto values = integrate_cumulative_samples(f.grid(), f.values());
  std::vector<double> integrand(f.values().begin(), f.values().end());
  return RadialFunction(f.grid(), std::move(values)).with_derivatives(std::move(integrand));
}

double grid_tolerance(const RadialGrid& grid, std::size_t i, double factor) {
  const double h = grid.step(i);
  return factor * h * h;
}

double unit_sphere_area(int d) {
  const double half = 0.5 * static_cast<double>(d);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

// ---------------------------------------------------------------------------

RadialFunction::RadialFunction(RadialGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::invalid_range, "value count does not match node count");
  }
}

RadialFunction RadialFunction::analytic(RadialGrid grid, AnalyticFn fn, int analytic_order) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = fn(grid[i], 0);
  RadialFunction out(std::move(grid), std::move(values));
  out.fn_ = std::move(fn);
  out.analytic_order_ = std::clamp(analytic_order, 0, max_order);
  return out;
}

RadialFunction RadialFunction::with_derivatives(std::vector<double> d1, std::vector<double> d2,
                                                std::vector<double> d3) const {
  RadialFunction out = *this;
  std::array<std::vector<double>, max_order> arrays{std::move(d1), std::move(d2), std::move(d3)};
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    if (arrays[k].empty()) break;
    if (arrays[k].size() != grid_.size()) {
      throw Error(ErrorKind::invalid_range, "derivative sample count does not match node count");
    }
    out.derivs_[k] = std::move(arrays[k]);
  }
  return out;
}

bool RadialFunction::has_samples(int order) const {
  if (order == 0) return true;
  if (order < 0 || order > max_order) return false;
  return !derivs_[static_cast<std::size_t>(order - 1)].empty();
}

std::vector<double> RadialFunction::samples(int order) const {
  if (order == 0) return values_;
  if (has_analytic(order)) {
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) out[i] = fn_(grid_[i], order);
    return out;
  }
  if (has_samples(order)) return derivs_[static_cast<std::size_t>(order - 1)];
  int base = order - 1;
  while (base > 0 && !has_samples(base) && !has_analytic(base)) --base;
  return differentiate_samples(grid_, samples(base), order - base);
}

double RadialFunction::at(double r, int order) const {
  if (has_analytic(order)) return fn_(r, order);
  const double span = grid_.r_max() - grid_.r_min();
  if (r < grid_.r_min() - 1e-12 * span || r > grid_.r_max() + 1e-12 * span) {
    throw Error(ErrorKind::out_of_grid, "radius " + std::to_string(r) + " outside grid");
  }
  const std::size_t i = grid_.locate(r);
  const double x0 = grid_[i];
  const double x1 = grid_[i + 1];
  if (has_samples(order) && has_samples(order + 1)) {
    const auto& y = order == 0 ? values_ : derivs_[static_cast<std::size_t>(order - 1)];
    const auto& dy = derivs_[static_cast<std::size_t>(order)];
    const double h = x1 - x0;
    const double t = (r - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * dy[i] + (-2 * t3 + 3 * t2) * y[i + 1] +
           (t3 - t2) * h * dy[i + 1];
  }
  int base = order;
  while (base > 0 && !has_samples(base)) --base;
  const auto& y = base == 0 ? values_ : derivs_[static_cast<std::size_t>(base - 1)];
  const std::size_t width = static_cast<std::size_t>(order - base) + 4;
  // Centre the stencil on the interval [x0, x1].
  const std::size_t back = width / 2 - 1;
  std::size_t first = i >= back ? i - back : 0;
  if (first + width > grid_.size()) first = grid_.size() - width;
  return stencil_apply(grid_.nodes(), y, first, width, r, order - base);
}

}  // namespace bel
