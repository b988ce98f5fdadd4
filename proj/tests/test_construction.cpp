#include <cmath>

#include "bel/construction.hpp"
#include "bel/error.hpp"
#include "doctest.h"

using namespace bel;

TEST_CASE("explicit warping values") {
  auto g = make_grid(0, 10, 101, Spacing::uniform);
  auto psi = explicit_warping(g, 0.5);
  CHECK(psi.at(1.0) == doctest::Approx(0.853553390593).epsilon(1e-11));
  CHECK(psi.at(0.0, 1) == 1.0);
  CHECK(psi.at(0.0, 3) == doctest::Approx(-1.5));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(0.5 * g[i] < psi[i]);
    CHECK(psi[i] < g[i]);
  }
  // Analytic derivatives against finite differences.
  RadialFunction plain(g, std::vector<double>(psi.values().begin(), psi.values().end()));
  for (int k = 1; k <= 3; ++k) {
    auto a = psi.samples(k);
    auto b = plain.samples(k);
    for (std::size_t i = 2; i + 2 < g.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= grid_tolerance(g, i));
  }
}

TEST_CASE("build_example preconditions") {
  auto g = make_grid(0, 10, 101, Spacing::uniform);
  CHECK_THROWS_AS(build_example(3, 0.0, 0.0, g), Error);
  CHECK_THROWS_AS(build_example(3, 1.0, 0.0, g), Error);
  CHECK_THROWS_AS(build_example(2, 0.5, 0.0, g), Error);
  try {
    build_example(3, 1.5, 0.0, g);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_alpha);
  }
  CHECK_THROWS_AS(condition_checks(euclidean_manifold(3, g)), Error);
  auto ex = build_example(3, 0.5, 0.7, g);
  CHECK(ex.manifold.f0() == 0.7);
}

TEST_CASE("condition checks on the example") {
  auto ex = build_example(3, 0.5);
  auto c = condition_checks(ex.manifold);
  CHECK(c.i);
  CHECK(c.ii);
  CHECK(c.iii);
  CHECK(c.weight_residual_ratio <= 1.0);
  CHECK(condition_checks(ex.manifold, Exec::serial).max_iii_slack == c.max_iii_slack);
}

TEST_CASE("verify_theorem on the reference cases") {
  struct Case {
    int d;
    double alpha, p, ell;
  };
  for (Case cs : {Case{3, 0.5, 5.0, 1.0}, Case{4, 0.5, 3.0, 2.0}, Case{3, 0.5, 6.0, 1.0}, Case{5, 0.25, 7.0 / 3.0, 1.0}}) {
    CAPTURE(cs.d);
    CAPTURE(cs.p);
    auto ex = build_example(cs.d, cs.alpha);
    auto t = verify_theorem(ex, cs.p, cs.ell);
    for (const auto& c : t.checks()) {
      CAPTURE(c.name);
      CAPTURE(c.value);
      CHECK(c.pass);
    }
    CHECK(t.all_passed());
    CHECK(t.chi_derivative_dominance_nodes == 0);
    CHECK(t.K_decomposition_gap < 1e-6);
    CHECK(t.bound_constant > 0.0);
  }
}

TEST_CASE("verify_theorem rejects subcritical exponents") {
  auto ex = build_example(3, 0.5, 0.0, make_grid(0, 100, 512, Spacing::geometric));
  CHECK_THROWS_AS(verify_theorem(ex, 4.0, 1.0), Error);
  CHECK_THROWS_AS(verify_theorem(ex, 5.0, -1.0), Error);
}
