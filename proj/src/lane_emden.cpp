#include "bel/lane_emden.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "bel/error.hpp"

namespace bel {

namespace {

constexpr double overflow_guard = 1e300;

std::string format_radius(double r) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), r, std::chars_format::general, 10);
  return std::string(buf.data(), res.ptr);
}

struct State {
  double u;
  double du;
};

// Right-hand side of u'' = -Lr u' - N(u).
class RadialOde {
 public:
  RadialOde(const ModelManifold& m, Nonlinearity kind, double p) : m_(m), kind_(kind), p_(p) {}

  double source(double u) const {
    if (kind_ == Nonlinearity::liouville) return std::exp(u);
    // Odd extension keeps trial stages that overshoot the zero well defined.
    return std::copysign(std::pow(std::abs(u), p_), u);
  }
  double source_derivative(double u) const {
    if (kind_ == Nonlinearity::liouville) return std::exp(u);
    return p_ * std::pow(std::abs(u), p_ - 1.0);
  }
  State operator()(double r, const State& y) const { return {y.du, -m_.drift(r) * y.du - source(y.u)}; }

 private:
  const ModelManifold& m_;
  Nonlinearity kind_;
  double p_;
};

struct StepResult {
  State y;
  double err;
};

// Dormand-Prince 5(4); the error is the embedded difference scaled by the state size.
StepResult dp_step(const RadialOde& f, double r, const State& y, double h, double tol) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  auto comb = [&](std::initializer_list<std::pair<double, State>> terms) {
    State s = y;
    for (const auto& [c, k] : terms) {
      s.u += h * c * k.u;
      s.du += h * c * k.du;
    }
    return s;
  };
  const State k1 = f(r, y);
  const State k2 = f(r + h / 5, comb({{a21, k1}}));
  const State k3 = f(r + 3 * h / 10, comb({{a31, k1}, {a32, k2}}));
  const State k4 = f(r + 4 * h / 5, comb({{a41, k1}, {a42, k2}, {a43, k3}}));
  const State k5 = f(r + 8 * h / 9, comb({{a51, k1}, {a52, k2}, {a53, k3}, {a54, k4}}));
  const State k6 = f(r + h, comb({{a61, k1}, {a62, k2}, {a63, k3}, {a64, k4}, {a65, k5}}));
  const State yn = comb({{b1, k1}, {b3, k3}, {b4, k4}, {b5, k5}, {b6, k6}});
  const State k7 = f(r + h, yn);
  const double eu = h * (e1 * k1.u + e3 * k3.u + e4 * k4.u + e5 * k5.u + e6 * k6.u + e7 * k7.u);
  const double edu = h * (e1 * k1.du + e3 * k3.du + e4 * k4.du + e5 * k5.du + e6 * k6.du + e7 * k7.du);
  const double scale = std::max({std::abs(y.u), std::abs(y.du), std::abs(yn.u), std::abs(yn.du), 1e-300});
  const double err = std::max(std::abs(eu), std::abs(edu)) / (tol * scale);
  return {yn, std::isfinite(err) ? err : std::numeric_limits<double>::infinity()};
}

bool blown_up(const State& y) {
  return !std::isfinite(y.u) || !std::isfinite(y.du) || std::abs(y.u) > overflow_guard ||
         std::abs(y.du) > overflow_guard;
}

SolutionProfile integrate(const ModelManifold& m, Nonlinearity kind, double p, double ell, double r_max,
                          const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorKind::invalid_range, "tolerance must be positive");
  const RadialGrid& grid = m.grid();
  if (!(r_max > 0.0) || r_max > grid.r_max() * (1 + 1e-12)) {
    throw Error(ErrorKind::out_of_grid, "r_max must lie in (0, grid r_max]");
  }
  const int d = m.dimension();
  const RadialOde ode(m, kind, p);
  std::size_t n_end = grid.lower_index(r_max * (1 - 1e-12));
  n_end = std::min(n_end, grid.size() - 1) + 1;  // nodes [0, n_end) are targets

  const double n0 = ode.source(ell);
  const double r0 = series_handoff_radius(grid);
  std::vector<double> u(n_end), du(n_end);
  std::size_t k = 0;
  for (; k < n_end && grid[k] <= r0; ++k) {
    const double r = grid[k];
    u[k] = ell - n0 * r * r / (2.0 * d);
    du[k] = -n0 * r / d;
  }
  double r = r0;
  State y{ell - n0 * r0 * r0 / (2.0 * d), -n0 * r0 / d};
  double h = std::min(1e-2 * (grid[1] - grid[0]), grid[k < n_end ? k : n_end - 1] - r0);
  if (!(h > 0.0)) h = 1e-3 * r0;

  SolutionProfile out{m, kind, p, ell, opts.tol, RadialFunction(grid, std::vector<double>(grid.size())),
                      RadialFunction(grid, std::vector<double>(grid.size())), SolveStatus::global_positive,
                      0.0, 0.0, 0, 0};
  bool crossed = false;
  double r_star = 0.0;
  double du_star = 0.0;

  while (k < n_end) {
    double h_try = h;
    if (opts.max_step > 0.0) h_try = std::min(h_try, opts.max_step);
    const double to_node = grid[k] - r;
    const bool clipped = h_try >= to_node;
    if (clipped) h_try = to_node;
    if (h_try < 1e-15 * std::max(1.0, r)) {
      throw Error(ErrorKind::blowup_detected, "step size underflow at r = " + format_radius(r));
    }
    const StepResult st = dp_step(ode, r, y, h_try, opts.tol);
    if (!(st.err <= 1.0)) {
      ++out.rejected_steps;
      if (blown_up(y)) throw Error(ErrorKind::blowup_detected, "solution overflow near r = " + format_radius(r));
      h = h_try * std::max(0.2, std::isfinite(st.err) ? 0.9 * std::pow(st.err, -0.2) : 0.2);
      continue;
    }
    if (blown_up(st.y)) throw Error(ErrorKind::blowup_detected, "solution overflow near r = " + format_radius(r));
    ++out.accepted_steps;
    if (kind == Nonlinearity::lane_emden && st.y.u <= 0.0) {
      // Refine the first zero by bisection on the step length.
      double lo = 0.0;
      double hi = h_try;
      double root = h_try;
      double root_du = st.y.du;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (r + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const State ym = dp_step(ode, r, y, mid, opts.tol).y;
        root = mid;
        root_du = ym.du;
        if (std::abs(ym.u) <= opts.tol) break;
        if (ym.u > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      crossed = true;
      r_star = r + root;
      du_star = root_du;
      break;
    }
    const double grow = st.err > 0.0 ? std::min(5.0, 0.9 * std::pow(st.err, -0.2)) : 5.0;
    const double h_next = h_try * grow;
    y = st.y;
    if (clipped) {
      r = grid[k];
      u[k] = y.u;
      du[k] = y.du;
      ++k;
      // A clipped step says nothing about the controller's preferred size.
      h = std::max(h, h_next);
    } else {
      r += h_try;
      h = h_next;
    }
  }

  std::size_t count = k;
  if (crossed) {
    if (count < RadialGrid::min_nodes) {
      throw Error(ErrorKind::insufficient_nodes,
                  "only " + std::to_string(count) + " nodes precede the zero at r = " + format_radius(r_star));
    }
    out.status = SolveStatus::crossed_zero;
    out.r_end = r_star;
    out.u_prime_at_end = du_star;
  } else {
    out.status = kind == Nonlinearity::liouville ? SolveStatus::truncated : SolveStatus::global_positive;
    out.r_end = grid[count - 1];
    out.u_prime_at_end = du[count - 1];
  }
  u.resize(count);
  du.resize(count);
  std::vector<double> nodes(grid.nodes().begin(), grid.nodes().begin() + static_cast<std::ptrdiff_t>(count));
  RadialGrid sub(std::move(nodes), grid.spacing());
  std::vector<double> d2(count), d3(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double ri = sub[i];
    if (ri <= r0) {
      d2[i] = -n0 / d;
      d3[i] = 0.0;
      continue;
    }
    const double lr = m.drift(ri);
    d2[i] = -lr * du[i] - ode.source(u[i]);
    d3[i] = -m.drift_derivative(ri) * du[i] - lr * d2[i] - ode.source_derivative(u[i]) * du[i];
  }
  out.u = RadialFunction(sub, u).with_derivatives(du, d2);
  out.u_prime = RadialFunction(sub, std::move(du)).with_derivatives(std::move(d2), std::move(d3));
  return out;
}

}  // namespace

std::string SolutionProfile::status_string() const {
  switch (status) {
    case SolveStatus::global_positive: return "global-positive";
    case SolveStatus::crossed_zero: return "crossed-zero-at(" + format_radius(r_end) + ")";
    case SolveStatus::truncated: return "truncated-at(" + format_radius(r_end) + ")";
  }
  return "unknown";
}

double SolutionProfile::nonlinearity(double value) const {
  return kind == Nonlinearity::liouville ? std::exp(value) : std::pow(value, p);
}

double SolutionProfile::potential(double value) const {
  return kind == Nonlinearity::liouville ? std::exp(value) : std::pow(value, p + 1.0) / (p + 1.0);
}

double critical_exponent(int d) {
  if (d < 3) throw Error(ErrorKind::invalid_dimension, "critical exponent needs d >= 3");
  return (d + 2.0) / (d - 2.0);
}

double series_handoff_radius(const RadialGrid& grid) { return std::max(1e-4, 1e-2 * (grid[1] - grid[0])); }

SolutionProfile solve_radial(const ModelManifold& m, double p, double ell, double r_max, SolverOptions opts) {
  if (!(ell > 0.0)) throw Error(ErrorKind::nonpositive_ell, "center value must be positive");
  if (!(p > 1.0)) throw Error(ErrorKind::invalid_exponent, "exponent must exceed 1");
  return integrate(m, Nonlinearity::lane_emden, p, ell, r_max, opts);
}

SolutionProfile solve_liouville(const ModelManifold& m, double ell, double r_max, SolverOptions opts) {
  if (m.dimension() != 2) throw Error(ErrorKind::wrong_dimension, "Liouville equation requires d = 2");
  if (!std::isfinite(ell)) throw Error(ErrorKind::invalid_range, "center value must be finite");
  return integrate(m, Nonlinearity::liouville, 0.0, ell, r_max, opts);
}

namespace {

void require_in_profile(const SolutionProfile& s, double r) {
  const auto& g = s.u.grid();
  if (r < 0.0 || r > g.r_max() * (1 + 1e-12)) {
    throw Error(ErrorKind::out_of_range, "radius " + format_radius(r) + " outside the solution range");
  }
}

double exponent_of(const SolutionProfile& s) {
  if (s.kind != Nonlinearity::lane_emden) {
    throw Error(ErrorKind::invalid_exponent, "Pohozaev quantities need a Lane-Emden profile");
  }
  return s.p;
}

}  // namespace

double energy(const SolutionProfile& s, double r) {
  require_in_profile(s, r);
  const double du = s.u_prime.at(r);
  return 0.5 * du * du + s.potential(s.u.at(r));
}

double pohozaev(const ModelManifold& m, const SolutionProfile& s, double r) {
  const double p = exponent_of(s);
  require_in_profile(s, r);
  if (r == 0.0) return 0.0;
  return m.volume_integral().at(r) * energy(s, r) + m.density(r) * s.u.at(r) * s.u_prime.at(r) / (p + 1.0);
}

double pohozaev_slope_factor(const ModelManifold& m, double p, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::singular_radius, "slope factor needs r > 0");
  const int d = m.dimension();
  const double a = 0.5 + 1.0 / (p + 1.0);
  const double w = m.density(r);
  if (r < m.series_radius()) return (a - (d - 1.0) / d) * w;
  const double lr = m.drift(r);
  if (!(lr > 0.0)) {
    throw Error(ErrorKind::monotonicity_violated, "(e^{-f} psi^{d-1})' <= 0 at r = " + format_radius(r));
  }
  return a * w - lr * m.volume_integral().at(r);
}

std::vector<double> pohozaev_slope_factor_decomposed(const ModelManifold& m, double p) {
  const int d = m.dimension();
  const auto& g = m.grid();
  const double lead = 0.5 + 1.0 / (p + 1.0) - (d - 1.0) / d;
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto p2 = m.psi_nodes(2);
  const auto f1 = m.f_nodes(1);
  const auto f2 = m.f_nodes(2);
  const auto w = m.volume_integral().samples(1);
  std::vector<double> lr(g.size(), 0.0), integrand(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    lr[i] = (d - 1) * p1[i] / p0[i] - f1[i];
    const double x = -(d - 1) * p2[i] / p0[i] + f2[i] + 2 * p1[i] * f1[i] / p0[i] - f1[i] * f1[i] / (d - 1);
    integrand[i] = w[i] * x / (lr[i] * lr[i]);
  }
  const auto J = integrate_cumulative_samples(g, integrand);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = lead * w[i] + (d - 1.0) / d * lr[i] * J[i];
  return out;
}

PohozaevTrace pohozaev_trace(const SolutionProfile& s, double k_tol, double p_tol, Exec exec) {
  const double p = exponent_of(s);
  const ModelManifold& m = s.manifold;
  const int d = m.dimension();
  const auto& g = s.u.grid();
  const std::size_t first = std::min(m.first_regular_index(), g.size() - 1);
  const std::size_t count = g.size() - first;
  const auto W = m.volume_integral().values();
  const auto w = m.volume_integral().samples(1);
  const auto u = s.u.values();
  const auto du = s.u_prime.values();
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto f1 = m.f_nodes(1);
  const double a = 0.5 + 1.0 / (p + 1.0);

  PohozaevTrace t;
  t.r.resize(count);
  t.energy.resize(count);
  t.pohozaev.resize(count);
  t.slope_factor.resize(count);
  std::vector<double> lr(count), scale(count);
  for_each_index(count, exec, [&](std::size_t j) {
    const std::size_t i = first + j;
    t.r[j] = g[i];
    const double e = 0.5 * du[i] * du[i] + std::pow(u[i], p + 1) / (p + 1);
    const double flux = w[i] * u[i] * du[i] / (p + 1);
    t.energy[j] = e;
    t.pohozaev[j] = W[i] * e + flux;
    scale[j] = std::abs(W[i] * e) + std::abs(flux);
    lr[j] = (d - 1) * p1[i] / p0[i] - f1[i];
    t.slope_factor[j] = a * w[i] - lr[j] * W[i];
  });
  for (std::size_t j = 0; j < count; ++j) {
    if (!(lr[j] > 0.0)) {
      throw Error(ErrorKind::monotonicity_violated, "(e^{-f} psi^{d-1})' <= 0 at r = " + format_radius(t.r[j]));
    }
  }
  t.max_K = *std::max_element(t.slope_factor.begin(), t.slope_factor.end());
  // K is a difference of two terms of size a w; rounding alone is ~1e-16 a w.
  t.K_nonpositive = true;
  for (std::size_t j = 0; j < count; ++j) {
    if (t.slope_factor[j] > k_tol * std::max(1.0, a * w[first + j])) t.K_nonpositive = false;
  }
  t.max_P = -std::numeric_limits<double>::infinity();
  t.P_nonpositive = true;
  for (std::size_t j = 0; j < count; ++j) {
    t.max_P = std::max(t.max_P, t.pohozaev[j]);
    if (t.pohozaev[j] > p_tol * std::max(1.0, scale[j])) t.P_nonpositive = false;
  }
  t.E_decreasing = true;
  for (std::size_t j = 1; j < count; ++j) {
    if (t.energy[j] > t.energy[j - 1] * (1 + 1e-12) + 1e-300) t.E_decreasing = false;
  }
  if (m.weight_from_warping()) {
    const auto full = pohozaev_slope_factor_decomposed(m, p);
    t.slope_factor_decomposed.assign(full.begin() + static_cast<std::ptrdiff_t>(first),
                                     full.begin() + static_cast<std::ptrdiff_t>(first + count));
    for (std::size_t j = 0; j < count; ++j) {
      const double gap = std::abs(t.slope_factor[j] - t.slope_factor_decomposed[j]);
      t.decomposition_gap = std::max(t.decomposition_gap, gap / std::max(1.0, std::abs(t.slope_factor[j])));
    }
  }
  return t;
}

std::vector<double> positivity_quantity(const ModelManifold& m) {
  const int d = m.dimension();
  const auto p0 = m.psi_nodes(0);
  const auto p1 = m.psi_nodes(1);
  const auto p2 = m.psi_nodes(2);
  const auto f1 = m.f_nodes(1);
  const auto f2 = m.f_nodes(2);
  std::vector<double> out;
  for (std::size_t i = m.first_regular_index(); i < m.grid().size(); ++i) {
    out.push_back(-(d - 1) * p2[i] / p0[i] + f2[i] + 2 * p1[i] * f1[i] / p0[i] - f1[i] * f1[i] / (d - 1));
  }
  return out;
}

bool positivity_criterion(const ModelManifold& m) {
  const auto q = positivity_quantity(m);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] > grid_tolerance(m.grid(), m.first_regular_index() + j)) return false;
  }
  return true;
}

BoundCheck asymptotic_bound_check(const SolutionProfile& s, double C, double slack) {
  const double p = exponent_of(s);
  if (!(C > 0.0)) throw Error(ErrorKind::invalid_range, "bound constant must be positive");
  const auto& g = s.u.grid();
  BoundCheck out;
  out.all = true;
  out.max_excess = -std::numeric_limits<double>::infinity();
  const double base = std::pow(s.ell, 1.0 - p);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double b = std::pow(C * g[i] * g[i] + base, -1.0 / (p - 1.0));
    const double excess = s.u[i] - b;
    out.r.push_back(g[i]);
    out.bound.push_back(b);
    out.holds.push_back(excess <= slack);
    out.all = out.all && out.holds.back();
    out.max_excess = std::max(out.max_excess, excess);
  }
  return out;
}

std::vector<double> divergence_form_residual(const SolutionProfile& s) {
  const auto& g = s.u.grid();
  const auto w = s.manifold.volume_integral().samples(1);
  std::vector<double> flux(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) flux[i] = w[i] * s.u_prime[i];
  const auto dflux = differentiate_samples(g, flux, 1);
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) out.push_back(dflux[i] + w[i] * s.nonlinearity(s.u[i]));
  return out;
}

std::vector<std::optional<SolutionProfile>> solve_many(const ModelManifold& m, const std::vector<double>& p,
                                                       const std::vector<double>& ell, double r_max,
                                                       SolverOptions opts, Exec exec) {
  if (p.size() != ell.size()) throw Error(ErrorKind::invalid_range, "parameter lists differ in length");
  std::vector<std::optional<SolutionProfile>> out(p.size());
  for_each_index(p.size(), exec, [&](std::size_t i) {
    try {
      out[i] = solve_radial(m, p[i], ell[i], r_max, opts);
    } catch (const Error&) {
      out[i].reset();
    }
  });
  return out;
}

}  // namespace bel
