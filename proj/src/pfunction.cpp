#include "bel/pfunction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "bel/error.hpp"

namespace bel {

namespace {

using Jet = std::array<double, 4>;

void require_positive_radius(double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::singular_radius, "evaluation at r = " + std::to_string(r));
}

// Derivatives of g(u) to order 3, composed with the jet of u.
Jet compose(const Jet& g, const Jet& u) {
  const double u1 = u[1], u2 = u[2], u3 = u[3];
  return {g[0], g[1] * u1, g[2] * u1 * u1 + g[1] * u2, g[3] * u1 * u1 * u1 + 3 * g[2] * u1 * u2 + g[1] * u3};
}

Jet v_jet(const Jet& u, Nonlinearity kind, double p) {
  if (kind == Nonlinearity::liouville) {
    const double e = std::exp(-u[0] / 2);
    return compose({e, -e / 2, e / 4, -e / 8}, u);
  }
  const double s = (p - 1) / 2;
  const double g0 = std::pow(u[0], -s);
  const double g1 = -s * g0 / u[0];
  const double g2 = -(s + 1) * g1 / u[0];
  const double g3 = -(s + 2) * g2 / u[0];
  return compose({g0, g1, g2, g3}, u);
}

// P, P', P'' from the jet of v.
std::array<double, 3> p_jet(const Jet& v, double m, double c) {
  const double P = ((m / 2) * v[1] * v[1] + c) / v[0];
  const double P1 = v[1] * (m * v[2] - P) / v[0];
  const double N1 = v[2] * (m * v[2] - P) + v[1] * (m * v[3] - P1);
  const double P2 = N1 / v[0] - P1 * v[1] / v[0];
  return {P, P1, P2};
}

double smoothstep(double t, int k) {
  switch (k) {
    case 0: return t * t * t * (10 + t * (-15 + 6 * t));
    case 1: return 30 * t * t * (t - 1) * (t - 1);
    case 2: return 60 * t * (2 * t - 1) * (t - 1);
    default: return 60 * (6 * t * t - 6 * t + 1);
  }
}

double cutoff_value(double R, double r, int k) {
  if (r <= R) return k == 0 ? 1.0 : 0.0;
  if (r >= 2 * R) return 0.0;
  const double t = (r - R) / R;
  return (k == 0 ? 1.0 : 0.0) - smoothstep(t, k) / std::pow(R, k);
}

constexpr std::size_t quadrature_panels = 256;

// Radial integral of density * fn over [0, b], split at R where the integrand has a kink.
template <class Fn>
double radial_integral(const ModelManifold& m, Fn&& fn, double R, double b) {
  auto integrand = [&](double r) { return m.density(r) * fn(r); };
  double acc = gauss_integral(integrand, 0.0, std::min(R, b), quadrature_panels);
  if (b > R) acc += gauss_integral(integrand, R, b, quadrature_panels);
  return acc;
}

void require_in_grid(const RadialGrid& g, double r, const char* what) {
  if (r > g.r_max() * (1 + 1e-12) || r < 0.0) {
    throw Error(ErrorKind::out_of_grid, std::string(what) + " " + std::to_string(r) + " outside grid");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

SolutionProfile bubble(int d, double b, const RadialGrid& grid) {
  if (d < 3) throw Error(ErrorKind::invalid_dimension, "bubble needs d >= 3");
  if (!(b > 0.0)) throw Error(ErrorKind::invalid_range, "bubble needs b > 0");
  const double a = 1.0 / (d * (d - 2) * b);
  const double k = (d - 2) / 2.0;
  auto fn = [a, b, k](double r, int order) {
    const double A = a + b * r * r;
    switch (order) {
      case 0: return std::pow(A, -k);
      case 1: return -2 * b * k * r * std::pow(A, -k - 1);
      case 2: return -2 * b * k * std::pow(A, -k - 1) + 4 * b * b * k * (k + 1) * r * r * std::pow(A, -k - 2);
      case 3:
        return 12 * b * b * k * (k + 1) * r * std::pow(A, -k - 2) -
               8 * b * b * b * k * (k + 1) * (k + 2) * r * r * r * std::pow(A, -k - 3);
      default: {
        // Fourth derivative, served to u_prime's order-3 slot.
        const double c2 = 12 * b * b * k * (k + 1);
        const double c3 = 8 * b * b * b * k * (k + 1) * (k + 2);
        return c2 * std::pow(A, -k - 2) - 2 * b * (k + 2) * c2 * r * r * std::pow(A, -k - 3) -
               3 * c3 * r * r * std::pow(A, -k - 3) + 2 * b * (k + 3) * c3 * std::pow(r, 4) * std::pow(A, -k - 4);
      }
    }
  };
  auto u = RadialFunction::analytic(grid, fn);
  auto up = RadialFunction::analytic(grid, [fn](double r, int order) { return fn(r, order + 1); });
  const double r_end = grid.r_max();
  return SolutionProfile{euclidean_manifold(d, grid),
                         Nonlinearity::lane_emden,
                         critical_exponent(d),
                         fn(0.0, 0),
                         0.0,
                         std::move(u),
                         std::move(up),
                         SolveStatus::global_positive,
                         r_end,
                         fn(r_end, 1),
                         0,
                         0};
}

SolutionProfile log_bubble(double b, const RadialGrid& grid) {
  if (!(b > 0.0)) throw Error(ErrorKind::invalid_range, "log bubble needs b > 0");
  const double a = 1.0 / (8 * b);
  auto fn = [a, b](double r, int order) {
    const double A = a + b * r * r;
    switch (order) {
      case 0: return -2 * std::log(A);
      case 1: return -4 * b * r / A;
      case 2: return -4 * b / A + 8 * b * b * r * r / (A * A);
      case 3: return 24 * b * b * r / (A * A) - 32 * b * b * b * r * r * r / (A * A * A);
      default:
        return 24 * b * b / (A * A) - 96 * b * b * b * r * r / (A * A * A) - 96 * b * b * b * r * r / (A * A * A) +
               192 * b * b * b * b * std::pow(r, 4) / (A * A * A * A);
    }
  };
  auto u = RadialFunction::analytic(grid, fn);
  auto up = RadialFunction::analytic(grid, [fn](double r, int order) { return fn(r, order + 1); });
  const double r_end = grid.r_max();
  return SolutionProfile{euclidean_manifold(2, grid),
                         Nonlinearity::liouville,
                         0.0,
                         fn(0.0, 0),
                         0.0,
                         std::move(u),
                         std::move(up),
                         SolveStatus::truncated,
                         r_end,
                         fn(r_end, 1),
                         0,
                         0};
}

std::vector<double> equation_residual(const SolutionProfile& s) {
  const auto& g = s.u.grid();
  const auto u1 = s.u.samples(1);
  const auto u2 = s.u.samples(2);
  const int d = s.manifold.dimension();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lu = g[i] > 0.0 ? u2[i] + s.manifold.drift(g[i]) * u1[i] : d * u2[i];
    out[i] = lu + s.nonlinearity(s.u[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

PFunctionData v_transform(const SolutionProfile& s, std::optional<VirtualDimension> n) {
  const int d = s.manifold.dimension();
  const VirtualDimension nd = n.value_or(VirtualDimension::finite(d));
  if (!nd.infinite && !(nd.value >= d)) throw Error(ErrorKind::invalid_n, "virtual dimension must be >= d");

  const bool liouville = s.kind == Nonlinearity::liouville;
  if (!liouville) {
    if (s.status == SolveStatus::crossed_zero) {
      throw Error(ErrorKind::nonpositive_u, "profile " + s.status_string());
    }
    for (double x : s.u.values()) {
      if (!(x > 0.0)) throw Error(ErrorKind::nonpositive_u, "profile is not positive on its range");
    }
  }
  const double m = liouville ? 2.0 : 2 * (s.p + 1) / (s.p - 1);
  const double c = liouville ? 0.5 : 2 / (m - 2);
  const auto kind = s.kind;
  const double p = s.p;
  const auto& g = s.u.grid();

  if (s.u.has_analytic(3)) {
    const RadialFunction u = s.u;
    auto vfn = [u, kind, p](double r, int k) {
      return v_jet({u.at(r, 0), u.at(r, 1), u.at(r, 2), u.at(r, 3)}, kind, p)[static_cast<std::size_t>(k)];
    };
    auto pfn = [vfn, m, c](double r, int k) {
      return p_jet({vfn(r, 0), vfn(r, 1), vfn(r, 2), vfn(r, 3)}, m, c)[static_cast<std::size_t>(k)];
    };
    return {s.manifold, m, c, nd, RadialFunction::analytic(g, vfn), RadialFunction::analytic(g, pfn, 2)};
  }

  const auto u1 = s.u.samples(1);
  const auto u2 = s.u.samples(2);
  const auto u3 = s.u_prime.samples(2);
  std::array<std::vector<double>, 4> v;
  std::array<std::vector<double>, 3> P;
  for (auto& x : v) x.resize(g.size());
  for (auto& x : P) x.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Jet vj = v_jet({s.u[i], u1[i], u2[i], u3[i]}, kind, p);
    const auto pj = p_jet(vj, m, c);
    for (std::size_t k = 0; k < 4; ++k) v[k][i] = vj[k];
    for (std::size_t k = 0; k < 3; ++k) P[k][i] = pj[k];
  }
  auto vf = RadialFunction(g, std::move(v[0])).with_derivatives(std::move(v[1]), std::move(v[2]), std::move(v[3]));
  auto pf = RadialFunction(g, std::move(P[0])).with_derivatives(std::move(P[1]), std::move(P[2]));
  return {s.manifold, m, c, nd, std::move(vf), std::move(pf)};
}

HessianParts hessian_parts(const PFunctionData& data, double r) {
  require_positive_radius(r);
  const auto& M = data.manifold;
  const int d = M.dimension();
  const double v1 = data.v.at(r, 1);
  const double v2 = data.v.at(r, 2);
  const double tangential = M.psi(r, 1) / M.psi(r) * v1;
  const double lap = v2 + (d - 1) * tangential;
  const double fv = M.f(r, 1) * v1;
  const double t0 = v2 - lap / d;
  const double t1 = tangential - lap / d;
  return {v2 * v2 + (d - 1) * tangential * tangential,
          t0 * t0 + (d - 1) * t1 * t1,
          lap,
          lap - fv,
          fv,
          ric_infinity_components(M, r).radial,
          v1};
}

double k_functional(const PFunctionData& data, double r) {
  const auto h = hessian_parts(data, r);
  return h.hessian_sq - h.drift_lap * h.drift_lap / data.m + h.ric_r * h.v1 * h.v1;
}

double k_decomposed(const PFunctionData& data, double r) {
  const auto h = hessian_parts(data, r);
  const double d = data.manifold.dimension();
  const double m = data.m;
  const double L = h.drift_lap;
  const double X = h.grad_f_v;
  if (data.n.infinite || data.n.value == d) {
    // n = d reduces to the same expression (X = 0 whenever Ric_{d,d} is finite).
    return h.traceless_sq + (1 / d - 1 / m) * L * L + (2 / d) * L * X + X * X / d + h.ric_r * h.v1 * h.v1;
  }
  const double n = data.n.value;
  const double y = L + n / (n - d) * X;
  const double ric_n = h.ric_r - std::pow(data.manifold.f(r, 1), 2) / (n - d);
  return h.traceless_sq + (m - n) / (m * n) * L * L + (n - d) / (n * d) * y * y + ric_n * h.v1 * h.v1;
}

double w_functional(const PFunctionData& data, double r) {
  const int d = data.manifold.dimension();
  const double m = data.m;
  if (!data.n.infinite && data.n.value > d && !(m > d)) {
    throw Error(ErrorKind::invalid_branch, "finite n > d needs m > d");
  }
  const auto h = hessian_parts(data, r);
  const double L = h.drift_lap;
  const double X = h.grad_f_v;
  const double ric = h.ric_r * h.v1 * h.v1;
  if (data.n.infinite) return (m - d) / (m * m) * L * L + (2 / m) * L * X + ric;
  if (data.n.value == d) return (m - d) / (m * m) * h.laplacian * h.laplacian + ric;
  const double n = data.n.value;
  const double y = (m - d) / m * L + X;
  const double ric_n = (h.ric_r - std::pow(data.manifold.f(r, 1), 2) / (n - d)) * h.v1 * h.v1;
  return y * y / (m - d) + (m - n) / ((n - d) * (m - d)) * X * X + ric_n;
}

namespace {

// X = v^{2-m} P' and div_f X at nodes; index range [first, size).
struct Flux {
  std::vector<double> X;
  std::vector<double> div;
  std::size_t first;
};

Flux flux(const PFunctionData& data) {
  const auto& g = data.v.grid();
  const auto P1 = data.P.samples(1);
  std::vector<double> X(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) X[i] = std::pow(data.v[i], 2 - data.m) * P1[i];
  auto dX = differentiate_samples(g, X, 1);
  const std::size_t first = std::min(data.manifold.first_regular_index(), g.size());
  for (std::size_t i = first; i < g.size(); ++i) dX[i] += data.manifold.drift(g[i]) * X[i];
  return {std::move(X), std::move(dX), first};
}

}  // namespace

RadialFunction divergence_identity_residual(const PFunctionData& data) {
  const auto& g = data.v.grid();
  const auto fx = flux(data);
  std::vector<double> res(g.size(), 0.0);
  for (std::size_t i = fx.first; i < g.size(); ++i) {
    const double lhs = data.m * std::pow(data.v[i], 1 - data.m) * k_functional(data, g[i]);
    res[i] = std::abs(lhs - fx.div[i]);
  }
  return RadialFunction(g, std::move(res));
}

std::vector<double> fundamental_inequality_slack(const PFunctionData& data) {
  const auto& g = data.v.grid();
  const auto fx = flux(data);
  const auto P1 = data.P.samples(1);
  std::vector<double> out;
  out.reserve(g.size() - fx.first);
  for (std::size_t i = fx.first; i < g.size(); ++i) {
    const double v = data.v[i];
    const double lhs = 0.5 / data.P[i] * std::pow(v, 2 - data.m) * P1[i] * P1[i] +
                       data.m * std::pow(v, 1 - data.m) * w_functional(data, g[i]);
    out.push_back(lhs - fx.div[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

RadialFunction radial_cutoff(double R, const ModelManifold& m) {
  if (!(R > 0.0)) throw Error(ErrorKind::invalid_range, "cutoff radius must be positive");
  require_in_grid(m.grid(), 2 * R, "cutoff support");
  return RadialFunction::analytic(m.grid(), [R](double r, int k) { return cutoff_value(R, r, k); });
}

CutoffConstants cutoff_constants(const RadialFunction& phi, const ModelManifold& m, double R) {
  constexpr std::size_t samples = 4000;
  CutoffConstants c{0.0, 0.0, 0.0};
  for (std::size_t j = 1; j < samples; ++j) {
    const double r = R + R * static_cast<double>(j) / samples;
    const double p0 = phi.at(r, 0);
    const double p1 = phi.at(r, 1);
    const double lap = phi.at(r, 2) + m.drift(r) * p1;
    c.gradient = std::max(c.gradient, R * std::abs(p1));
    if (p0 > 0.0) c.gradient_sq = std::max(c.gradient_sq, R * R * p1 * p1 / p0);
    c.drift_lap = std::max(c.drift_lap, -R * R * lap);
  }
  return c;
}

IbpResidual ibp_identity(const PFunctionData& data, double q, double R) {
  require_in_grid(data.v.grid(), 2 * R, "ibp support");
  const auto& M = data.manifold;
  const auto& v = data.v;
  auto phi = [R](double r, int k) { return cutoff_value(R, r, k); };
  const double b = 2 * R;
  const double t1 = (data.m / 2 + 1 - q) * radial_integral(
                                               M,
                                               [&](double r) {
                                                 const double v1 = v.at(r, 1);
                                                 const double p = phi(r, 0);
                                                 return std::pow(v.at(r), -q) * v1 * v1 * p * p;
                                               },
                                               R, b);
  const double t2 = data.c_m * radial_integral(
                                   M,
                                   [&](double r) {
                                     const double p = phi(r, 0);
                                     return std::pow(v.at(r), -q) * p * p;
                                   },
                                   R, b);
  const double t3 = -radial_integral(
      M, [&](double r) { return std::pow(v.at(r), 1 - q) * v.at(r, 1) * 2 * phi(r, 0) * phi(r, 1); }, R, b);
  return {t1 + t2, t3, std::abs(t1 + t2 - t3), std::abs(t1) + std::abs(t2) + std::abs(t3)};
}

EstimateRatio integral_estimate_ratio(const PFunctionData& data, double q, double R) {
  const double top = data.m / 2 + 1;
  if (!(q >= 0.0 && q <= top)) {
    throw Error(ErrorKind::q_out_of_range, "q = " + std::to_string(q) + " outside [0, " + std::to_string(top) + "]");
  }
  if (!(R > 0.0)) throw Error(ErrorKind::invalid_range, "radius must be positive");
  require_in_grid(data.v.grid(), 2 * R, "estimate support");
  const bool gradient_part = q >= 2.0 && q < top;
  const auto& v = data.v;
  const double S = unit_sphere_area(data.manifold.dimension());
  const double lhs = S * radial_integral(
                             data.manifold,
                             [&](double r) {
                               const double base = std::pow(v.at(r), -q);
                               if (!gradient_part) return base;
                               const double v1 = v.at(r, 1);
                               return base * (v1 * v1 + 1);
                             },
                             R, R);
  return {lhs, weighted_volume(data.manifold, 2 * R) * std::pow(R, -q)};
}

double cheng_yau_ratio(const SolutionProfile& s, double n, double R) {
  if (!(n > 2.0)) throw Error(ErrorKind::invalid_n, "Cheng-Yau ratio needs n > 2");
  if (!(R > 0.0)) throw Error(ErrorKind::invalid_range, "radius must be positive");
  const auto& g = s.u.grid();
  require_in_grid(g, 2 * R, "Cheng-Yau support");
  const auto u1 = s.u.samples(1);
  const double e = 4 / (n - 2);
  double num = 0.0, sup_u = 0.0;
  for (std::size_t i = 0; i < g.size() && g[i] <= 2 * R; ++i) {
    const double u = s.u[i];
    if (!(u > 0.0)) throw Error(ErrorKind::nonpositive_u, "profile is not positive on B_2R");
    if (g[i] <= R) num = std::max(num, (u1[i] / u) * (u1[i] / u));
    sup_u = std::max(sup_u, std::pow(u, e));
  }
  return num / (1 / (R * R) + sup_u);
}

FloorCheck superharmonic_floor_check(const SolutionProfile& s, double kappa, double R) {
  if (!(kappa > 2.0)) throw Error(ErrorKind::invalid_range, "kappa must exceed 2");
  const auto& g = s.u.grid();
  require_in_grid(g, R, "floor radius");
  const auto u1 = s.u.samples(1);
  const auto u2 = s.u.samples(2);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double a = u2[i];
    const double b = s.manifold.drift(g[i]) * u1[i];
    if (a + b > 1e-8 * std::max(1.0, std::abs(a) + std::abs(b))) {
      throw Error(ErrorKind::superharmonicity_violated, "L u > 0 at r = " + std::to_string(g[i]));
    }
  }
  for (double x : s.u.values()) {
    if (!(x > 0.0)) throw Error(ErrorKind::nonpositive_u, "profile is not positive");
  }
  FloorCheck out;
  out.A = std::pow(R, kappa - 2) * s.u.at(R);
  out.min_margin = INFINITY;
  for (std::size_t i = g.lower_index(R); i < g.size(); ++i) {
    const double floor = out.A * std::pow(g[i], 2 - kappa);
    out.min_margin = std::min(out.min_margin, s.u[i] / floor - 1);
  }
  out.holds = out.min_margin >= -1e-12;
  return out;
}

std::vector<EstimateRatio> integral_estimate_sweep(const PFunctionData& data, double q, const std::vector<double>& radii,
                                                   Exec exec) {
  // Validate serially so the parallel body cannot throw.
  for (double R : radii) {
    if (!(R > 0.0)) throw Error(ErrorKind::invalid_range, "radius must be positive");
    require_in_grid(data.v.grid(), 2 * R, "estimate support");
  }
  if (!(q >= 0.0 && q <= data.m / 2 + 1)) throw Error(ErrorKind::q_out_of_range, "q = " + std::to_string(q));
  std::vector<EstimateRatio> out(radii.size());
  for_each_index(radii.size(), exec, [&](std::size_t i) { out[i] = integral_estimate_ratio(data, q, radii[i]); });
  return out;
}

std::vector<double> cheng_yau_sweep(const SolutionProfile& s, double n, const std::vector<double>& radii, Exec exec) {
  if (!(n > 2.0)) throw Error(ErrorKind::invalid_n, "Cheng-Yau ratio needs n > 2");
  for (double R : radii) {
    if (!(R > 0.0)) throw Error(ErrorKind::invalid_range, "radius must be positive");
    require_in_grid(s.u.grid(), 2 * R, "Cheng-Yau support");
  }
  for (double x : s.u.values()) {
    if (!(x > 0.0)) throw Error(ErrorKind::nonpositive_u, "profile is not positive");
  }
  std::vector<double> out(radii.size());
  for_each_index(radii.size(), exec, [&](std::size_t i) { out[i] = cheng_yau_ratio(s, n, radii[i]); });
  return out;
}

double sweep_tail_slope(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size() || radii.empty())
    throw Error(ErrorKind::out_of_range, "sweep radii and values differ in length");
  const double lo = radii.back() / 10.0 * (1.0 - 1e-12);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, count = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < lo) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw Error(ErrorKind::out_of_range, "sweep value not positive and finite");
    const double x = std::log(radii[i]), y = std::log(values[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, count += 1;
  }
  if (count < 2 || radii.front() > lo) throw Error(ErrorKind::out_of_range, "sweep spans less than a decade");
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace bel
