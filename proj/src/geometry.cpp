#include "bel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bel/error.hpp"

namespace bel {

namespace {

void require_positive_radius(double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::singular_radius, "evaluation at r = " + std::to_string(r));
}

std::vector<double> node_samples(const RadialFunction& fn, int order) { return fn.samples(order); }

}  // namespace

ModelManifold::ModelManifold(int d, RadialFunction warping, RadialFunction weight, bool weight_from_warping)
    : d_(d),
      warping_(std::move(warping)),
      weight_(std::move(weight)),
      from_warping_(weight_from_warping),
      volume_(warping_.grid(), std::vector<double>(warping_.size(), 0.0)),
      psi_energy_(warping_.grid(), std::vector<double>(warping_.size(), 0.0)) {
  if (d_ < 2) throw Error(ErrorKind::invalid_dimension, "dimension must be at least 2");
  const RadialGrid& g = warping_.grid();
  if (g.r_min() != 0.0) throw Error(ErrorKind::invalid_manifold, "grid must start at the pole r = 0");
  if (weight_.size() != warping_.size() || weight_.grid().r_max() != g.r_max()) {
    throw Error(ErrorKind::invalid_manifold, "warping and weight live on different grids");
  }
  for (int k = 0; k < 3; ++k) {
    psi_[static_cast<std::size_t>(k)] = node_samples(warping_, k);
    f_[static_cast<std::size_t>(k)] = node_samples(weight_, k);
  }
  const auto& p0 = psi_[0];
  const auto& p1 = psi_[1];
  if (std::abs(p0[0]) > 1e-12) throw Error(ErrorKind::invalid_manifold, "psi(0) != 0");
  if (std::abs(p1[0] - 1.0) > 1e-6) throw Error(ErrorKind::invalid_manifold, "psi'(0) != 1");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(p1[i] > 0.0) || !(p0[i] > 0.0)) {
      throw Error(ErrorKind::invalid_manifold, "psi' must be positive at r = " + std::to_string(g[i]));
    }
  }
  if (std::abs(f_[1][0]) > 1e-6) throw Error(ErrorKind::invalid_manifold, "f'(0) != 0");

  // Both integrands have known derivatives, so the Hermite-corrected rule
  // (exact for cubics) is used; W enters quantities that cancel to ~1e-6.
  std::vector<double> density(g.size()), density_d(g.size());
  std::vector<double> energy(g.size()), energy_d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    density[i] = std::exp(-f_[0][i]) * std::pow(p0[i], d_ - 1);
    density_d[i] = i == 0 ? (d_ == 2 ? std::exp(-f_[0][0]) : 0.0)
                          : density[i] * ((d_ - 1) * p1[i] / p0[i] - f_[1][i]);
    energy[i] = p1[i] * p1[i];
    energy_d[i] = 2.0 * p1[i] * psi_[2][i];
  }
  volume_ = RadialFunction(g, integrate_hermite_samples(g, density, density_d))
                .with_derivatives(std::move(density), std::move(density_d));
  psi_energy_ = RadialFunction(g, integrate_hermite_samples(g, energy, energy_d))
                    .with_derivatives(std::move(energy), std::move(energy_d));

  series_radius_ = 3.0 * (g[1] - g[0]);
  first_regular_ = std::max<std::size_t>(1, g.lower_index(series_radius_));
}

double ModelManifold::drift(double r) const {
  require_positive_radius(r);
  return (d_ - 1) * psi(r, 1) / psi(r) - f(r, 1);
}

double ModelManifold::drift_derivative(double r) const {
  require_positive_radius(r);
  const double p = psi(r);
  const double q = psi(r, 1) / p;
  return (d_ - 1) * (psi(r, 2) / p - q * q) - f(r, 2);
}

double ModelManifold::density(double r) const { return std::exp(-f(r)) * std::pow(psi(r), d_ - 1); }

// ---------------------------------------------------------------------------

ModelManifold euclidean_manifold(int d, const RadialGrid& grid) {
  auto psi = RadialFunction::analytic(grid, [](double r, int k) { return k == 0 ? r : (k == 1 ? 1.0 : 0.0); });
  auto f = RadialFunction::analytic(grid, [](double, int) { return 0.0; });
  return ModelManifold(d, std::move(psi), std::move(f));
}

ModelManifold quadratic_weight_manifold(int d, const RadialGrid& grid, double coef) {
  auto psi = RadialFunction::analytic(grid, [](double r, int k) { return k == 0 ? r : (k == 1 ? 1.0 : 0.0); });
  auto f = RadialFunction::analytic(grid, [coef](double r, int k) {
    switch (k) {
      case 0: return coef * r * r;
      case 1: return 2.0 * coef * r;
      case 2: return 2.0 * coef;
      default: return 0.0;
    }
  });
  return ModelManifold(d, std::move(psi), std::move(f));
}

ModelManifold log_tail_manifold(int d, const RadialGrid& grid, double beta) {
  auto psi = RadialFunction::analytic(grid, [](double r, int k) { return k == 0 ? r : (k == 1 ? 1.0 : 0.0); });
  const double dm2 = d - 2.0;
  auto f = RadialFunction::analytic(
      grid,
      [dm2, beta](double r, int k) {
        const double e = std::numbers::e;
        const double s = 1.0 + r * r;
        const double t = e + r * r;
        const double lg = std::log(t);
        if (k == 0) return 0.5 * dm2 * std::log(s) - beta * std::log(0.5 * lg);
        if (k == 1) return dm2 * r / s - beta * 2.0 * r / (t * lg);
        const double num = 2.0 * t * lg - 4.0 * r * r * lg - 4.0 * r * r;
        return dm2 * (1.0 - r * r) / (s * s) - beta * num / (t * t * lg * lg);
      },
      2);
  return ModelManifold(d, std::move(psi), std::move(f));
}

// ---------------------------------------------------------------------------

RicciComponents ric_infinity_components(const ModelManifold& m, double r) {
  require_positive_radius(r);
  const int d = m.dimension();
  const double p0 = m.psi(r);
  const double p1 = m.psi(r, 1);
  const double p2 = m.psi(r, 2);
  const double f1 = m.f(r, 1);
  const double f2 = m.f(r, 2);
  return {-(d - 1) * p2 / p0 + f2, -p2 * p0 + (d - 2) * (1.0 - p1 * p1) + p0 * p1 * f1};
}

double ric_n_radial(const ModelManifold& m, double n, double r) {
  const int d = m.dimension();
  if (!(n > d)) throw Error(ErrorKind::invalid_n, "virtual dimension must exceed d");
  const double f1 = m.f(r, 1);
  return ric_infinity_components(m, r).radial - f1 * f1 / (n - d);
}

double weighted_laplacian_radial(const ModelManifold& m, const RadialFunction& w, double r) {
  require_positive_radius(r);
  return w.at(r, 2) + m.drift(r) * w.at(r, 1);
}

double laplacian_of_distance(const ModelManifold& m, double r) { return m.drift(r); }

double laplacian_of_distance_closed(const ModelManifold& m, double r) {
  require_positive_radius(r);
  if (!m.weight_from_warping()) {
    throw Error(ErrorKind::invalid_manifold, "closed form needs a weight built from the warping");
  }
  const double p = m.psi(r);
  return (m.dimension() - 1) * m.warping_energy().at(r) / (p * p);
}

double weighted_volume(const ModelManifold& m, double radius) {
  if (radius > m.grid().r_max() || radius < 0.0) {
    throw Error(ErrorKind::out_of_grid, "radius " + std::to_string(radius) + " outside grid");
  }
  return unit_sphere_area(m.dimension()) * m.volume_integral().at(radius);
}

CurvatureReport curvature_report(const ModelManifold& m, std::optional<double> n, Exec exec) {
  const int d = m.dimension();
  if (n && !(*n > d)) throw Error(ErrorKind::invalid_n, "virtual dimension must exceed d");
  const auto& g = m.grid();
  const std::size_t first = m.first_regular_index();
  const std::size_t count = g.size() - first;
  CurvatureReport rep;
  rep.n = n;
  rep.r.resize(count);
  rep.ric_r_inf.resize(count);
  rep.ric_theta_inf.resize(count);
  if (n) rep.ric_r_n.resize(count);
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto p2 = m.psi_nodes(2);
  const auto f1 = m.f_nodes(1);
  const auto f2 = m.f_nodes(2);
  for_each_index(count, exec, [&](std::size_t j) {
    const std::size_t i = first + j;
    rep.r[j] = g[i];
    rep.ric_r_inf[j] = -(d - 1) * p2[i] / p0[i] + f2[i];
    rep.ric_theta_inf[j] = -p2[i] * p0[i] + (d - 2) * (1.0 - p1[i] * p1[i]) + p0[i] * p1[i] * f1[i];
    if (n) rep.ric_r_n[j] = rep.ric_r_inf[j] - f1[i] * f1[i] / (*n - d);
  });
  rep.min_ric_r_inf = *std::min_element(rep.ric_r_inf.begin(), rep.ric_r_inf.end());
  rep.min_ric_theta_inf = *std::min_element(rep.ric_theta_inf.begin(), rep.ric_theta_inf.end());
  if (n) rep.min_ric_r_n = *std::min_element(rep.ric_r_n.begin(), rep.ric_r_n.end());
  return rep;
}

double log_log_slope(std::span<const double> r, std::span<const double> y, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < lo || r[i] > hi || !(r[i] > 0.0) || y[i] == 0.0) continue;
    const double x = std::log(r[i]);
    const double v = std::log(std::abs(y[i]));
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    ++k;
  }
  if (k < 2) throw Error(ErrorKind::insufficient_nodes, "log-log fit needs at least two samples");
  const double kk = static_cast<double>(k);
  return (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
}

ComparisonReport comparison_report(const ModelManifold& m, double r_max, Exec exec) {
  const int d = m.dimension();
  const auto& g = m.grid();
  if (r_max > g.r_max() * (1 + 1e-12)) throw Error(ErrorKind::out_of_grid, "R_max beyond grid");
  const std::size_t first = m.first_regular_index();
  std::size_t last = g.lower_index(r_max * (1 - 1e-12));
  last = std::min(last, g.size() - 1);
  ComparisonReport rep;
  const std::size_t count = last + 1 - first;
  rep.r.resize(count);
  rep.laplacian.resize(count);
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto f1 = m.f_nodes(1);
  for_each_index(count, exec, [&](std::size_t j) {
    const std::size_t i = first + j;
    rep.r[j] = g[i];
    rep.laplacian[j] = (d - 1) * p1[i] / p0[i] - f1[i];
  });
  rep.max_violation = -INFINITY;
  rep.rough_constant = -INFINITY;
  for (std::size_t j = 0; j < count; ++j) {
    const double scaled = rep.r[j] * rep.laplacian[j];
    rep.max_violation = std::max(rep.max_violation, scaled - (d - 1));
    rep.rough_constant = std::max(rep.rough_constant, scaled);
  }
  rep.sharp_laplacian_holds = rep.max_violation <= sharp_comparison_tolerance;

  const double area = unit_sphere_area(d);
  const auto vol = m.volume_integral().values();
  const auto dens = m.volume_integral().samples(1);
  rep.volume_constant = 0.0;
  std::vector<double> tail_r;
  std::vector<double> tail_y;
  for (std::size_t i = g.lower_index(1.0); i <= last; ++i) {
    rep.volume_constant = std::max(rep.volume_constant, area * vol[i] / std::pow(g[i], d));
    tail_r.push_back(g[i]);
    tail_y.push_back(1.0 / (area * dens[i]));
  }
  if (tail_r.size() >= 3) {
    rep.parabolicity_integral = integrate_cumulative_samples(tail_r, tail_y).back();
    rep.tail_exponent = log_log_slope(tail_r, tail_y, tail_r.back() / 10.0, tail_r.back());
  }
  // A decay exponent at or above -1 means the tail integral diverges.
  rep.parabolic = rep.tail_exponent >= -1.0 - 1e-3;
  return rep;
}

RadialFunction weight_from_warping(const RadialFunction& psi, int d, double f0) {
  const RadialGrid& g = psi.grid();
  const auto p0 = psi.samples(0);
  const auto p2 = psi.samples(2);
  std::vector<double> integrand(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > 0.0 && !(p2[i] < 0.0)) {
      throw Error(ErrorKind::warping_not_concave, "psi'' >= 0 at r = " + std::to_string(g[i]));
    }
    integrand[i] = p2[i] * p0[i];
  }
  const auto inner = integrate_cumulative_samples(g, integrand);
  std::vector<double> f1(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) f1[i] = (d - 1) * inner[i] / (p0[i] * p0[i]);
  auto f = integrate_cumulative_samples(g, f1);
  for (double& v : f) v += f0;
  auto f2 = differentiate_samples(g, f1, 1, 5);
  return RadialFunction(g, std::move(f)).with_derivatives(std::move(f1), std::move(f2));
}

std::vector<double> warping_weight_residual(const ModelManifold& m) {
  const int d = m.dimension();
  const auto& g = m.grid();
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto p2 = m.psi_nodes(2);
  const auto f1 = m.f_nodes(1);
  const auto f2 = m.f_nodes(2);
  std::vector<double> out;
  for (std::size_t i = m.first_regular_index(); i < g.size(); ++i) {
    out.push_back(f2[i] + 2.0 * p1[i] / p0[i] * f1[i] - (d - 1) * p2[i] / p0[i]);
  }
  return out;
}

}  // namespace bel
