#include <cmath>

#include "bel/error.hpp"
#include "bel/lane_emden.hpp"
#include "doctest.h"

using namespace bel;

namespace {

RadialFunction explicit_warping(const RadialGrid& g, double a) {
  return RadialFunction::analytic(g, [a](double r, int k) {
    const double s = 1.0 + r * r;
    switch (k) {
      case 0: return a * r + (1 - a) * r / std::sqrt(s);
      case 1: return a + (1 - a) * std::pow(s, -1.5);
      case 2: return -3 * (1 - a) * r * std::pow(s, -2.5);
      default: return -3 * (1 - a) * (1 - 4 * r * r) * std::pow(s, -3.5);
    }
  });
}

ModelManifold theorem_manifold(int d, double a, const RadialGrid& g) {
  auto psi = explicit_warping(g, a);
  auto f = weight_from_warping(psi, d, 0.0);
  return ModelManifold(d, std::move(psi), std::move(f), true);
}

}  // namespace

TEST_CASE("d=4 bubble reproduced by shooting") {
  auto g = make_grid(0, 10, 401, Spacing::uniform);
  auto m = euclidean_manifold(4, g);
  const double tol = 1e-10;
  auto s = solve_radial(m, 3.0, 1.0, 10.0, {tol});
  CHECK(s.status == SolveStatus::global_positive);
  CHECK(s.status_string() == "global-positive");
  double err = 0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double r = s.u.grid()[i];
    err = std::max(err, std::abs(s.u[i] - 1.0 / (1 + r * r / 8)));
  }
  CHECK(err <= 10 * tol);
  CHECK(s.u[0] == 1.0);
  CHECK(s.u_prime[0] == 0.0);
  for (std::size_t i = 1; i < s.u.size(); ++i) CHECK(s.u_prime[i] < 0.0);
}

TEST_CASE("series start matches the Taylor oracle") {
  // Substituting u = ell + c r^2 gives 2 c d = -N(ell).
  auto g = make_grid(0, 1, 101, Spacing::uniform);
  auto psi = explicit_warping(g, 0.5);
  ModelManifold m(3, psi, weight_from_warping(psi, 3, 0.0), true);
  const double ell = 1.7, p = 5.0, h = g[1];
  auto s = solve_radial(m, p, ell, 1.0);
  const double c = -std::pow(ell, p) / 6.0;
  CHECK(std::abs(s.u[1] - (ell + c * h * h)) <= 50 * std::pow(h, 4));
  CHECK(series_handoff_radius(g) == doctest::Approx(1e-4));

  auto g2 = make_grid(0, 1, 101, Spacing::uniform);
  auto l = solve_liouville(euclidean_manifold(2, g2), 0.3, 1.0);
  CHECK(std::abs(l.u[1] - (0.3 - std::exp(0.3) / 4 * h * h)) <= 50 * std::pow(h, 4));
}

TEST_CASE("solver errors") {
  auto g = make_grid(0, 10, 101, Spacing::uniform);
  auto m = euclidean_manifold(3, g);
  CHECK_THROWS_AS(solve_radial(m, 3.0, 0.0, 10.0), Error);
  CHECK_THROWS_AS(solve_radial(m, 1.0, 1.0, 10.0), Error);
  CHECK_THROWS_AS(solve_liouville(m, 0.0, 10.0), Error);
  try {
    solve_liouville(m, 0.0, 10.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::wrong_dimension);
  }
}

TEST_CASE("Gaussian soliton weight forces a zero crossing") {
  auto g = make_grid(0, 20, 2001, Spacing::uniform);
  auto m = quadratic_weight_manifold(3, g, 1.0);
  for (double ell : {0.5, 1.0, 2.0}) {
    auto s = solve_radial(m, 3.0, ell, 20.0);
    CHECK(s.status == SolveStatus::crossed_zero);
    CHECK(s.r_end > 0.0);
    CHECK(std::isfinite(s.r_end));
    CHECK(s.u_prime_at_end < 0.0);
    CHECK(s.status_string().rfind("crossed-zero-at(", 0) == 0);
  }
}

TEST_CASE("Liouville log bubble") {
  auto g = make_grid(0, 50, 2001, Spacing::uniform);
  auto m = euclidean_manifold(2, g);
  auto s = solve_liouville(m, 0.0, 50.0);
  CHECK(s.status == SolveStatus::truncated);
  double err = 0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double r = g[i];
    err = std::max(err, std::abs(s.u[i] + 2 * std::log(1 + r * r / 8)));
  }
  CHECK(err <= 1e-8);
  // Lower bound with G = log, r >= 10.
  for (std::size_t i = g.lower_index(10.0); i < s.u.size(); ++i) {
    const double r = g[i];
    CHECK(s.u[i] > -4 * std::log(r * std::sqrt(std::log(r))));
  }
}

TEST_CASE("energy and Pohozaev on the Euclidean critical bubble") {
  auto g = make_grid(0, 1000, 4096, Spacing::geometric);
  auto m = euclidean_manifold(4, g);
  auto s = solve_radial(m, 3.0, 1.0, 1000.0);
  CHECK(energy(s, 0.0) == doctest::Approx(0.25));
  CHECK(pohozaev(m, s, 0.0) == 0.0);
  CHECK_THROWS_AS(energy(s, 2000.0), Error);
  auto t = pohozaev_trace(s);
  CHECK(t.E_decreasing);
  CHECK(t.K_nonpositive);
  CHECK(t.P_nonpositive);
  CHECK(t.energy.back() < 1e-10);
  for (double k : t.slope_factor) CHECK(std::abs(k) <= 1e-6 * 1e9);
  CHECK(std::abs(pohozaev_slope_factor(m, 3.0, 2.0)) <= 1e-10);
  // Supercritical: leading coefficient negative, no curvature correction.
  for (double r : {0.5, 1.0, 10.0}) CHECK(pohozaev_slope_factor(m, 4.0, r) < 0.0);

  // E' = u'^2 (-(d-1)psi'/psi + f') by finite differences.
  const auto& sg = s.u.grid();
  std::vector<double> e(sg.size());
  for (std::size_t i = 0; i < sg.size(); ++i) e[i] = energy(s, sg[i]);
  auto de = differentiate_samples(sg, e, 1);
  for (std::size_t i = 1; i + 1 < sg.size() && sg[i] < 50; ++i) {
    const double r = sg[i];
    const double rhs = s.u_prime[i] * s.u_prime[i] * (-3.0 / r);
    CHECK(std::abs(de[i] - rhs) <= grid_tolerance(sg, i));
  }
}

TEST_CASE("positivity criterion") {
  auto g = make_grid(0, 10, 201, Spacing::uniform);
  CHECK(positivity_criterion(euclidean_manifold(3, g)));
  CHECK_FALSE(positivity_criterion(quadratic_weight_manifold(3, g, 1.0)));
  CHECK(positivity_criterion(quadratic_weight_manifold(3, g, -1.0)));
  auto m = theorem_manifold(3, 0.5, g);
  CHECK(positivity_criterion(m));
  auto q = positivity_quantity(m);
  const auto f1 = m.f_nodes(1);
  for (std::size_t j = 0; j < q.size(); ++j) {
    const std::size_t i = m.first_regular_index() + j;
    CHECK(std::abs(q[j] + f1[i] * f1[i] / 2) <= grid_tolerance(g, i));
  }
}

TEST_CASE("asymptotic bound on the d=4 bubble") {
  // (1+r^2/8)^{-1} <= (C r^2 + 1)^{-1/2} iff C <= 1/4 + r^2/64.
  auto g = make_grid(0, 100, 1024, Spacing::geometric);
  auto s = solve_radial(euclidean_manifold(4, g), 3.0, 1.0, 100.0);
  CHECK(asymptotic_bound_check(s, 1.0 / 64, 1e-9).all);
  CHECK(asymptotic_bound_check(s, 0.25, 1e-9).all);
  CHECK_FALSE(asymptotic_bound_check(s, 0.26, 1e-9).all);
  CHECK_FALSE(asymptotic_bound_check(s, 1.0, 1e-9).all);
  auto b = asymptotic_bound_check(s, 0.1);
  CHECK(b.bound[0] == doctest::Approx(1.0));
}

TEST_CASE("explicit warping manifold: Pohozaev structure and divergence form") {
  auto g = make_grid(0, 1000, 4096, Spacing::geometric);
  for (int d : {3, 4}) {
    auto m = theorem_manifold(d, 0.5, g);
    const double p = critical_exponent(d);
    auto s = solve_radial(m, p, 1.0, 1000.0);
    CHECK(s.status == SolveStatus::global_positive);
    auto t = pohozaev_trace(s);
    CHECK(t.K_nonpositive);
    CHECK(t.P_nonpositive);
    CHECK(t.E_decreasing);
    CHECK(t.decomposition_gap < 1e-6);
    // P_u' = K u'^2 by finite differences.
    const auto& sg = s.u.grid();
    std::vector<double> P(sg.size(), 0.0);
    for (std::size_t i = 1; i < sg.size(); ++i) P[i] = pohozaev(m, s, sg[i]);
    auto dP = differentiate_samples(sg, P, 1);
    for (std::size_t i = m.first_regular_index(); i + 1 < sg.size(); i += 7) {
      const double r = sg[i];
      const double rhs = pohozaev_slope_factor(m, p, r) * s.u_prime[i] * s.u_prime[i];
      const double scale = std::abs(m.volume_integral()[i] * energy(s, r)) + std::abs(rhs) + 1.0;
      CHECK(std::abs(dP[i] - rhs) <= 1e-3 * scale);
    }
    auto res = divergence_form_residual(s);
    const auto w = m.volume_integral().samples(1);
    for (std::size_t j = 0; j < res.size(); ++j) {
      const std::size_t i = j + 1;
      const double r = sg[i];
      const double h = sg.step(i);
      const double flux = std::abs(w[i] * s.u_prime[i]);
      // Central-difference error ~ h^2 (flux)''' with flux ~ r^{d-1} near the pole.
      const double tol = 1e-3 * (w[i] * std::pow(s.u[i], p) + flux / r) + 10 * h * h * flux / (r * r * r);
      CHECK(std::abs(res[j]) <= tol);
    }
  }
}

TEST_CASE("solve_many matches serial solves") {
  auto g = make_grid(0, 20, 512, Spacing::uniform);
  auto m = quadratic_weight_manifold(3, g, 1.0);
  std::vector<double> ps{3.0, 3.0, 5.0}, ells{0.5, 1.0, 2.0};
  auto a = solve_many(m, ps, ells, 20.0, {}, Exec::serial);
  auto b = solve_many(m, ps, ells, 20.0, {}, Exec::parallel);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].has_value());
    REQUIRE(b[i].has_value());
    CHECK(a[i]->r_end == b[i]->r_end);
  }
}
