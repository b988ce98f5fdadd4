#include <cmath>

#include "bel/construction.hpp"
#include "bel/error.hpp"
#include "bel/pfunction.hpp"
#include "doctest.h"

using namespace bel;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io_error;
}

// ||Hess v - (Lv/m) g||^2 for the radial Hessian.
double shifted_hessian_sq(const PFunctionData& data, double r) {
  const auto h = hessian_parts(data, r);
  const double d = data.manifold.dimension();
  const double s = h.drift_lap / data.m;
  const double tangential = (h.laplacian - data.v.at(r, 2)) / (d - 1);
  return std::pow(data.v.at(r, 2) - s, 2) + (d - 1) * std::pow(tangential - s, 2);
}

}  // namespace

TEST_CASE("bubbles solve their equations with analytic derivatives") {
  for (int d : {3, 4, 5, 6}) {
    auto s = bubble(d, 0.125);
    const double a = 1.0 / (d * (d - 2) * 0.125);
    CHECK(s.u[0] == doctest::Approx(std::pow(a, -(d - 2) / 2.0)));
    CHECK(s.p == critical_exponent(d));
    auto res = equation_residual(s);
    for (std::size_t i = 0; i < res.size() && s.u.grid()[i] <= 50; ++i) CHECK(std::abs(res[i]) <= 1e-8);
    // Higher derivatives against central differences.
    for (double r : {0.3, 2.0, 7.5}) {
      const double h = 1e-4;
      for (int k = 0; k < 3; ++k) {
        const double fd = (s.u_prime.at(r + h, k) - s.u_prime.at(r - h, k)) / (2 * h);
        CHECK(s.u_prime.at(r, k + 1) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
  CHECK(bubble(3, 1.0).u[0] == doctest::Approx(std::sqrt(3.0)));
  CHECK(bubble(4, 0.125).u.at(3.0) == doctest::Approx(1.0 / (1 + 9.0 / 8)));
  CHECK(kind_of([] { bubble(2, 1.0); }) == ErrorKind::invalid_dimension);

  auto l = log_bubble(0.125);
  CHECK(l.u[0] == 0.0);
  CHECK(l.manifold.dimension() == 2);
  for (double x : equation_residual(l)) CHECK(std::abs(x) <= 1e-8);
  for (double r : {0.5, 4.0}) {
    const double h = 1e-4;
    for (int k = 0; k < 3; ++k) {
      const double fd = (l.u_prime.at(r + h, k) - l.u_prime.at(r - h, k)) / (2 * h);
      CHECK(l.u_prime.at(r, k + 1) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("v-transform of bubbles: quadratic v and constant P") {
  auto data = v_transform(bubble(4, 0.125));
  CHECK(data.m == doctest::Approx(4.0));
  CHECK(data.c_m == doctest::Approx(1.0));
  CHECK(!data.n.infinite);
  CHECK(data.n.value == 4.0);
  for (double r : {0.0, 1.0, 10.0, 500.0}) {
    CHECK(data.v.at(r) == doctest::Approx(1 + r * r / 8).epsilon(1e-13));
    CHECK(std::abs(data.P.at(r) - 1.0) <= 1e-8);
  }
  for (int d : {3, 4, 5, 6}) {
    auto dd = v_transform(bubble(d, 0.125));
    CHECK(dd.m == doctest::Approx(d));
    double dev = 0;
    for (double P : dd.P.values()) dev = std::max(dev, std::abs(P - 2 * 0.125 * d));
    CHECK(dev <= 1e-8);
  }
  auto ld = v_transform(log_bubble(0.125));
  CHECK(ld.m == 2.0);
  CHECK(ld.c_m == 0.5);
  for (double r : {0.0, 3.0, 100.0}) {
    CHECK(ld.v.at(r) == doctest::Approx(1 + r * r / 8).epsilon(1e-13));
    CHECK(std::abs(ld.P.at(r) - 0.5) <= 1e-8);
  }
}

TEST_CASE("v-transform on solver data keeps the P invariant") {
  auto ex = build_example(3, 0.5);
  auto s = solve_radial(ex.manifold, 5.0, 1.0, 1000.0);
  auto data = v_transform(s, VirtualDimension::infinity());
  CHECK(data.n.infinite);
  const auto v1 = data.v.samples(1);
  for (std::size_t i = 0; i < data.v.size(); ++i) {
    CHECK(data.v[i] > 0.0);
    CHECK(data.P[i] > 0.0);
    const double P = (data.m / 2 * v1[i] * v1[i] + data.c_m) / data.v[i];
    CHECK(data.P[i] == doctest::Approx(P).epsilon(1e-14));
  }
  // P' and P'' against differences of the node samples.
  const auto& g = data.v.grid();
  auto dP = differentiate_samples(g, std::vector<double>(data.P.values().begin(), data.P.values().end()), 1);
  const auto P1 = data.P.samples(1);
  for (std::size_t i = 10; i + 10 < g.size(); i += 101) {
    CHECK(std::abs(dP[i] - P1[i]) <= grid_tolerance(g, i, 100) * (1 + std::abs(P1[i])));
  }

  auto crossed = solve_radial(quadratic_weight_manifold(3, make_grid(0, 20, 512, Spacing::uniform), 1.0), 3.0, 1.0, 20.0);
  REQUIRE(crossed.status == SolveStatus::crossed_zero);
  CHECK(kind_of([&] { v_transform(crossed); }) == ErrorKind::nonpositive_u);
}

TEST_CASE("k functional and its sum-of-squares form") {
  auto data = v_transform(bubble(4, 0.125));
  for (double r : {0.01, 1.0, 5.0, 100.0}) {
    CHECK(std::abs(k_functional(data, r)) <= 1e-8);
    CHECK(std::abs(k_decomposed(data, r)) <= 1e-8);
  }
  CHECK(kind_of([&] { k_functional(data, 0.0); }) == ErrorKind::singular_radius);

  // Subcritical on flat space (m > n = d): k >= 0 and both forms agree.
  // The subcritical flat solution crosses zero near r = 6.9, so stop at r = 5.
  auto g = make_grid(0, 5, 1024, Spacing::uniform);
  auto sub = v_transform(solve_radial(euclidean_manifold(3, g), 3.0, 1.0, 5.0));
  CHECK(sub.m > 3.0);
  for (std::size_t i = 5; i < sub.v.size(); i += 37) {
    const double r = sub.v.grid()[i];
    const double k = k_functional(sub, r);
    CHECK(k >= -1e-10);
    CHECK(std::abs(k - k_decomposed(sub, r)) <= 1e-10 * (1 + std::abs(k)));
  }

  // Weighted data, every branch of n.
  auto ex = build_example(3, 0.5);
  auto s = solve_radial(ex.manifold, 6.0, 1.0, 1000.0);
  for (auto n : {VirtualDimension::infinity(), VirtualDimension::finite(4.0), VirtualDimension::finite(7.5)}) {
    auto d = v_transform(s, n);
    for (double r : {0.05, 0.7, 3.0, 40.0}) {
      const double k = k_functional(d, r);
      CHECK(std::abs(k - k_decomposed(d, r)) <= 1e-8 * (1 + std::abs(k)));
    }
  }
}

TEST_CASE("W_f branches equal k minus the shifted Hessian norm") {
  auto ex = build_example(3, 0.5);
  auto s = solve_radial(ex.manifold, 6.0, 1.0, 1000.0);  // m = 2.8 < d
  auto inf = v_transform(s, VirtualDimension::infinity());
  for (double r : {0.05, 0.7, 3.0, 40.0}) {
    const double w = w_functional(inf, r);
    const double oracle = k_functional(inf, r) - shifted_hessian_sq(inf, r);
    CHECK(std::abs(w - oracle) <= 1e-10 * (1 + std::abs(k_functional(inf, r))));
  }
  auto fin = v_transform(s, VirtualDimension::finite(4.0));
  CHECK(kind_of([&] { w_functional(fin, 1.0); }) == ErrorKind::invalid_branch);

  // Subcritical exponent gives m > d, so the finite branch applies.
  auto g = make_grid(0, 3, 1024, Spacing::uniform);
  auto flat = solve_radial(quadratic_weight_manifold(3, g, -0.5), 4.0, 1.0, 3.0);
  REQUIRE(flat.status != SolveStatus::crossed_zero);
  for (double n : {3.5, 4.5}) {
    auto d = v_transform(flat, VirtualDimension::finite(n));
    REQUIRE(d.m > 3.0);
    for (double r : {0.2, 1.0, 2.5}) {
      if (r > flat.r_end) continue;
      const double oracle = k_functional(d, r) - shifted_hessian_sq(d, r);
      CHECK(std::abs(w_functional(d, r) - oracle) <= 1e-10 * (1 + std::abs(oracle)));
    }
  }

  // n = d on flat bubbles: m = d leaves only the Ricci term, which vanishes.
  auto b = v_transform(bubble(4, 0.125));
  for (double r : {0.5, 9.0}) CHECK(std::abs(w_functional(b, r)) <= 1e-12);
}

TEST_CASE("divergence identity") {
  for (int d : {3, 4, 6}) {
    auto data = v_transform(bubble(d, 0.125));
    auto res = divergence_identity_residual(data);
    const auto& g = res.grid();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(res[i] <= grid_tolerance(g, i, 100));
  }
  auto ldata = v_transform(log_bubble(0.125));
  auto lres = divergence_identity_residual(ldata);
  for (std::size_t i = 0; i < lres.size(); ++i) CHECK(lres[i] <= grid_tolerance(lres.grid(), i, 100));

  for (int d : {3, 4}) {
    auto ex = build_example(d, 0.5);
    auto s = solve_radial(ex.manifold, critical_exponent(d), 1.0, 1000.0);
    auto data = v_transform(s, VirtualDimension::infinity());
    auto res = divergence_identity_residual(data);
    const auto& g = res.grid();
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, res[i] / grid_tolerance(g, i, 100));
    CHECK(worst <= 1.0);
    // The flux is genuinely nonzero here, unlike on bubbles.
    CHECK(std::abs(data.P.at(1.0, 1)) > 1e-3);

    auto slack = fundamental_inequality_slack(data);
    const std::size_t first = data.manifold.first_regular_index();
    for (std::size_t j = 0; j < slack.size(); ++j) {
      const std::size_t i = first + j;
      if (w_functional(data, g[i]) >= 0.0) CHECK(slack[j] <= grid_tolerance(g, i, 100));
    }
  }
}

TEST_CASE("radial cutoff") {
  auto m = euclidean_manifold(3, make_grid(0, 100, 2048, Spacing::geometric));
  std::optional<CutoffConstants> ref;
  for (double R : {1.0, 2.0, 4.0, 8.0}) {
    auto phi = radial_cutoff(R, m);
    CHECK(phi.at(0.0) == 1.0);
    CHECK(phi.at(R) == 1.0);
    CHECK(phi.at(2 * R) == 0.0);
    CHECK(phi.at(1.5 * R) == doctest::Approx(0.5));
    auto c = cutoff_constants(phi, m, R);
    CHECK(c.gradient == doctest::Approx(1.875).epsilon(1e-6));  // max S' = 30/16
    CHECK(c.gradient_sq == doctest::Approx(10.804903718464070802).epsilon(1e-6));  // max S'^2/(1-S)
    if (!ref) {
      ref = c;
    } else {
      CHECK(c.gradient == doctest::Approx(ref->gradient).epsilon(1e-12));
      CHECK(c.gradient_sq == doctest::Approx(ref->gradient_sq).epsilon(1e-12));
      CHECK(c.drift_lap == doctest::Approx(ref->drift_lap).epsilon(1e-12));
    }
  }
  CHECK(kind_of([&] { radial_cutoff(60.0, m); }) == ErrorKind::out_of_grid);
}

TEST_CASE("integration-by-parts identity") {
  auto data = v_transform(bubble(4, 0.125));
  for (double q : {0.0, 2.0, 3.0}) {
    for (double R : {1.0, 10.0}) {
      auto ibp = ibp_identity(data, q, R);
      CHECK(ibp.scale > 0.0);
      CHECK(ibp.residual <= 1e-10 * ibp.scale);
    }
  }
  auto ex = build_example(3, 0.5);
  auto tdata = v_transform(solve_radial(ex.manifold, 5.0, 1.0, 1000.0), VirtualDimension::infinity());
  for (double q : {0.0, 2.0, tdata.m / 2 + 1}) {
    auto ibp = ibp_identity(tdata, q, 2.0);
    CHECK(ibp.residual <= 1e-6 * ibp.scale);
  }
}

TEST_CASE("integral estimate ratios on the d=4 bubble") {
  auto data = v_transform(bubble(4, 0.125));
  // mpmath quadrature of the closed-form integrands.
  CHECK(integral_estimate_ratio(data, 2.0, 1.0).ratio() == doctest::Approx(0.0555555555555555556).epsilon(1e-9));
  CHECK(integral_estimate_ratio(data, 2.0, 10.0).ratio() == doctest::Approx(0.462962962962962953).epsilon(1e-9));
  CHECK(integral_estimate_ratio(data, 2.0, 100.0).ratio() == doctest::Approx(0.499600319744204612).epsilon(1e-9));
  CHECK(integral_estimate_ratio(data, 3.0, 1.0).ratio() == doctest::Approx(0.049382716049382716).epsilon(1e-9));
  CHECK(integral_estimate_ratio(data, 3.0, 10.0).ratio() == doctest::Approx(0.342935528120713299).epsilon(1e-9));
  CHECK(integral_estimate_ratio(data, 3.0, 100.0).ratio() == doctest::Approx(0.0399360767181618432).epsilon(1e-9));
  for (double R : {1.0, 7.0, 50.0}) CHECK(integral_estimate_ratio(data, 0.0, R).ratio() <= 1.0);
  CHECK(kind_of([&] { integral_estimate_ratio(data, 3.5, 1.0); }) == ErrorKind::q_out_of_range);
  CHECK(kind_of([&] { integral_estimate_ratio(data, -0.1, 1.0); }) == ErrorKind::q_out_of_range);

  std::vector<double> radii;
  for (int k = 0; k <= 20; ++k) radii.push_back(std::pow(10.0, k / 10.0));
  auto a = integral_estimate_sweep(data, 2.0, radii, Exec::serial);
  auto b = integral_estimate_sweep(data, 2.0, radii, Exec::parallel);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    CHECK(a[i].lhs == b[i].lhs);
    CHECK(a[i].ratio() <= 10 * a[0].ratio());
  }
}

TEST_CASE("Cheng-Yau ratio") {
  auto s = bubble(4, 0.125, make_grid(0, 400, 40001, Spacing::uniform));
  // sup of (r/4)^2/(1+r^2/8)^2 is attained at r = min(R, sqrt 8).
  CHECK(cheng_yau_ratio(s, 4.0, 1.0) == doctest::Approx(0.0246913580246913567).epsilon(1e-12));
  CHECK(cheng_yau_ratio(s, 4.0, 10.0) == doctest::Approx(0.123762376237623762).epsilon(1e-4));
  CHECK(cheng_yau_ratio(s, 4.0, 100.0) == doctest::Approx(0.124987501249875012).epsilon(1e-4));
  CHECK(cheng_yau_ratio(s, 4.0, 1e-2) < 1e-8);
  CHECK(kind_of([&] { cheng_yau_ratio(s, 2.0, 1.0); }) == ErrorKind::invalid_n);

  std::vector<double> radii{1.0, 3.0, 10.0, 30.0, 100.0};
  CHECK(cheng_yau_sweep(s, 4.0, radii, Exec::serial) == cheng_yau_sweep(s, 4.0, radii, Exec::parallel));

  auto ex = build_example(3, 0.5);
  auto t = solve_radial(ex.manifold, 5.0, 1.0, 1000.0);
  auto ratios = cheng_yau_sweep(t, 3.0, radii);
  for (double x : ratios) {
    CHECK(std::isfinite(x));
    CHECK(x <= 10 * ratios.front() + 1.0);
  }
}

TEST_CASE("superharmonic floor") {
  auto s3 = bubble(3, 0.125);
  auto f3 = superharmonic_floor_check(s3, 3.0, 1.0);
  CHECK(f3.holds);
  CHECK(f3.A == doctest::Approx(s3.u.at(1.0)));
  auto f4 = superharmonic_floor_check(bubble(4, 0.125), 4.0, 1.0);
  CHECK(f4.holds);
  CHECK(f4.min_margin >= 0.0);
  // A faster floor than the true decay must fail somewhere.
  CHECK_FALSE(superharmonic_floor_check(s3, 2.5, 1.0).holds);

  // The log bubble is superharmonic but not positive.
  auto g = make_grid(0, 10, 256, Spacing::uniform);
  auto grow = SolutionProfile{euclidean_manifold(3, g),
                              Nonlinearity::lane_emden,
                              3.0,
                              1.0,
                              0.0,
                              RadialFunction::analytic(g, [](double r, int k) {
                                return k == 0 ? 1 + r * r : k == 1 ? 2 * r : k == 2 ? 2.0 : 0.0;
                              }),
                              RadialFunction::analytic(g, [](double r, int k) { return k == 0 ? 2 * r : k == 1 ? 2.0 : 0.0; }),
                              SolveStatus::global_positive,
                              10.0,
                              20.0,
                              0,
                              0};
  CHECK(kind_of([&] { superharmonic_floor_check(grow, 3.0, 1.0); }) == ErrorKind::superharmonicity_violated);
}

TEST_CASE("sweep tail slope") {
  std::vector<double> radii, flat, power, saturating;
  for (int k = 0; k <= 20; ++k) {
    const double R = std::pow(10.0, k / 10.0);
    radii.push_back(R);
    flat.push_back(3.0);
    power.push_back(2.0 * std::sqrt(R));
    saturating.push_back(1.0 / 12.0 - 1.0 / (12.0 * R * R));
  }
  CHECK(sweep_tail_slope(radii, flat) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sweep_tail_slope(radii, power) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sweep_tail_slope(radii, saturating) < sweep_slope_tolerance);
  CHECK_THROWS_AS(sweep_tail_slope({1.0, 2.0, 5.0}, {1.0, 1.0, 1.0}), Error);
  flat.back() = 0.0;
  CHECK_THROWS_AS(sweep_tail_slope(radii, flat), Error);
}
