#include <cmath>
#include <numbers>

#include "bel/error.hpp"
#include "bel/geometry.hpp"
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

TEST_CASE("Euclidean curvature vanishes") {
  auto g = make_grid(0, 10, 201, Spacing::uniform);
  for (int d : {2, 3, 4, 6}) {
    auto m = euclidean_manifold(d, g);
    auto rep = curvature_report(m, 8.0);
    for (std::size_t j = 0; j < rep.r.size(); ++j) {
      CHECK(std::abs(rep.ric_r_inf[j]) <= 1e-12);
      CHECK(std::abs(rep.ric_theta_inf[j]) <= 1e-12);
      CHECK(rep.ric_r_n[j] == rep.ric_r_inf[j]);
    }
    CHECK(laplacian_of_distance(m, 2.0) == doctest::Approx((d - 1) / 2.0));
  }
  auto m3 = euclidean_manifold(3, g);
  auto rc = ric_infinity_components(m3, 1.0);
  CHECK(rc.radial == 0.0);
  CHECK(rc.angular == 0.0);
  CHECK_THROWS_AS(ric_infinity_components(m3, 0.0), Error);
  CHECK_THROWS_AS(ric_n_radial(m3, 3.0, 1.0), Error);
}

TEST_CASE("quadratic weight substitution") {
  auto g = make_grid(0, 5, 101, Spacing::uniform);
  const double a = 0.3;
  auto m = quadratic_weight_manifold(3, g, a);
  auto rc = ric_infinity_components(m, 2.0);
  CHECK(rc.radial == doctest::Approx(2 * a));
  CHECK(rc.angular == doctest::Approx(8 * a));
  CHECK(ric_n_radial(m, 4.0, 1.0) == doctest::Approx(2 * a - 4 * a * a));
  CHECK(ric_n_radial(m, 1e12, 1.0) == doctest::Approx(2 * a).epsilon(1e-9));
  CHECK(laplacian_of_distance(m, 1.0) == doctest::Approx(2 - 2 * a));
  for (double n : {3.5, 4.0, 10.0}) {
    for (double r : {0.5, 1.0, 3.0}) CHECK(ric_n_radial(m, n, r) <= ric_infinity_components(m, r).radial);
  }
}

TEST_CASE("weighted Laplacian of r^2 and constants") {
  auto g = make_grid(0, 5, 101, Spacing::uniform);
  auto m = euclidean_manifold(3, g);
  auto w = RadialFunction::analytic(g, [](double r, int k) { return k == 0 ? r * r : (k == 1 ? 2 * r : (k == 2 ? 2.0 : 0.0)); });
  CHECK(weighted_laplacian_radial(m, w, 1.3) == doctest::Approx(6.0));
  auto c = RadialFunction::analytic(g, [](double, int k) { return k == 0 ? 4.0 : 0.0; });
  CHECK(weighted_laplacian_radial(m, c, 2.0) == 0.0);
}

TEST_CASE("weighted volume of Euclidean balls") {
  auto g = make_grid(0, 2, 201, Spacing::uniform);
  CHECK(weighted_volume(euclidean_manifold(3, g), 1.0) == doctest::Approx(4 * std::numbers::pi / 3).epsilon(1e-9));
  CHECK(weighted_volume(euclidean_manifold(2, g), 2.0) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-9));
  CHECK_THROWS_AS(weighted_volume(euclidean_manifold(2, g), 3.0), Error);
}

TEST_CASE("comparison report on Euclidean data") {
  auto g = make_grid(0, 1000, 2048, Spacing::geometric);
  for (int d : {2, 3, 4}) {
    auto rep = comparison_report(euclidean_manifold(d, g), 1000.0);
    CHECK(rep.sharp_laplacian_holds);
    CHECK(rep.rough_constant == doctest::Approx(d - 1).epsilon(1e-12));
    CHECK(rep.parabolic == (d == 2));
    CHECK(rep.tail_exponent == doctest::Approx(1.0 - d).epsilon(1e-6));
  }
}

TEST_CASE("explicit warping and its weight") {
  auto g = make_grid(0, 10, 2001, Spacing::uniform);
  auto psi = explicit_warping(g, 0.5);
  CHECK(psi.at(1.0) == doctest::Approx(0.5 + 0.5 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(psi.at(0.0, 3) == doctest::Approx(-1.5));
  CHECK_THROWS_AS(weight_from_warping(RadialFunction::analytic(g, [](double r, int k) { return k == 0 ? r : (k == 1 ? 1.0 : 0.0); }), 3, 0.0),
                  Error);

  // Frozen oracles: adaptive high-precision nested quadrature (30 digits).
  auto m3 = theorem_manifold(3, 0.5, g);
  const std::size_t i1 = g.lower_index(1.0);
  CHECK(g[i1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m3.f_nodes(1)[i1] == doctest::Approx(-0.444770218789027854).epsilon(1e-6));
  CHECK(m3.f_nodes(0)[i1] == doctest::Approx(-0.327793958018076804).epsilon(1e-6));
  CHECK(m3.warping_energy()[i1] == doctest::Approx(0.739684468411784541).epsilon(1e-9));
  auto m4 = theorem_manifold(4, 0.5, g);
  CHECK(m4.f_nodes(1)[i1] == doctest::Approx(-0.667155328183541782).epsilon(1e-6));

  for (std::size_t i = 1; i < g.size(); ++i) CHECK(m3.f_nodes(1)[i] < 0.0);
  auto rc = ric_infinity_components(m3, 1.0);
  CHECK(rc.radial > 0.0);
  CHECK(rc.angular > 0.0);

  auto res = warping_weight_residual(m3);
  for (std::size_t j = 0; j < res.size(); ++j) {
    const std::size_t i = m3.first_regular_index() + j;
    CHECK(std::abs(res[j]) <= grid_tolerance(g, i));
  }
  for (double r : {0.5, 1.0, 4.0, 9.0}) {
    CHECK(laplacian_of_distance_closed(m3, r) == doctest::Approx(laplacian_of_distance(m3, r)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(laplacian_of_distance_closed(euclidean_manifold(3, g), 1.0), Error);
}

TEST_CASE("explicit warping comparison: sharp fails, rough holds") {
  auto g = make_grid(0, 1000, 4096, Spacing::geometric);
  for (int d : {3, 4}) {
    auto m = theorem_manifold(d, 0.5, g);
    auto rep = comparison_report(m, 1000.0);
    CHECK_FALSE(rep.sharp_laplacian_holds);
    CHECK(rep.rough_constant <= (d - 1) / 0.25);
    CHECK(rep.rough_constant >= d - 1);
  }
}

TEST_CASE("log-tail weight is non-parabolic") {
  auto g = make_grid(0, 1000, 4096, Spacing::geometric);
  auto m = log_tail_manifold(3, g, 2.0);
  auto rep = comparison_report(m, 1000.0);
  CHECK_FALSE(rep.parabolic);
  CHECK(rep.tail_exponent < -1.0);
  // Analytic f'' against finite differences of the analytic f'.
  auto fd = differentiate_samples(g, m.f_nodes(1), 1);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(std::abs(fd[i] - m.f_nodes(2)[i]) <= grid_tolerance(g, i));
  // mu(B_R) <= C R^2 log^2 R with a stable constant on [10, 1000].
  double cmin = 1e300, cmax = 0;
  for (double R : {10.0, 31.6, 100.0, 316.0, 1000.0}) {
    const double c = weighted_volume(m, R) / (R * R * std::pow(std::log(R), 2));
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  CHECK(cmax / cmin < 3.0);
}

TEST_CASE("serial and parallel reports are identical") {
  auto g = make_grid(0, 100, 1024, Spacing::geometric);
  auto psi = explicit_warping(g, 0.4);
  ModelManifold m(3, psi, weight_from_warping(psi, 3, 0.0), true);
  auto a = curvature_report(m, 5.0, Exec::serial);
  auto b = curvature_report(m, 5.0, Exec::parallel);
  CHECK(a.ric_r_inf == b.ric_r_inf);
  CHECK(a.ric_theta_inf == b.ric_theta_inf);
  CHECK(comparison_report(m, 100.0, Exec::serial).laplacian == comparison_report(m, 100.0, Exec::parallel).laplacian);
}
