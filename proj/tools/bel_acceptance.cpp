// Acceptance run: one pass/fail line per criterion with its measured value,
// tolerance and wall time. Exit status 0 iff every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bel/construction.hpp"
#include "bel/pfunction.hpp"
#include "bel/scenario.hpp"

#ifndef BEL_CONFIG_DIR
#define BEL_CONFIG_DIR "configs"
#endif

using namespace bel;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = true;
  std::string measured;  // short "name=value" summary
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Criterion {
  int id;
  std::string title;
  double time_limit;
  std::function<Result()> run;
};

std::vector<double> radii_1_100() {
  std::vector<double> r;
  for (int k = 0; k <= 20; ++k) r.push_back(std::pow(10.0, k / 10.0));
  return r;
}

double tail_slope(const std::vector<double>& v) { return sweep_tail_slope(radii_1_100(), v); }

struct TheoremCase {
  int d;
  double alpha, p, ell;
};

const std::vector<TheoremCase>& theorem_cases() {
  static const std::vector<TheoremCase> cases{
      {3, 0.5, 5.0, 1.0}, {4, 0.5, 3.0, 2.0}, {3, 0.5, 6.0, 1.0}, {5, 0.25, critical_exponent(5), 1.0}};
  return cases;
}

// 1 ----------------------------------------------------------------------
Result euclidean_sanity() {
  Result res;
  double ric = 0.0, lr = 0.0;
  for (int d : {2, 3, 4, 6}) {
    const auto g = make_grid(0, 10, 1001, Spacing::uniform);
    const auto m = euclidean_manifold(d, g);
    for (std::size_t i = 1; i < g.size(); ++i) {
      const auto c = ric_infinity_components(m, g[i]);
      ric = std::max({ric, std::abs(c.radial), std::abs(c.angular)});
      lr = std::max(lr, std::abs(m.drift(g[i]) * g[i] - (d - 1)));
    }
  }
  const auto m3 = euclidean_manifold(3, make_grid(0, 10, 1001, Spacing::uniform));
  const double vol = std::abs(weighted_volume(m3, 1.0) - 4 * std::numbers::pi / 3);
  res.require(ric <= 1e-10, "|Ric| <= 1e-10");
  res.require(lr <= 1e-12, "|r Lr - (d-1)| <= 1e-12");
  res.require(vol <= 1e-6, "|mu(B_1) - 4 pi/3| <= 1e-6");
  res.measured = "max|Ric|=" + num(ric) + " (tol 1e-10), max|r Lr-(d-1)|=" + num(lr) + " (tol 1e-12), |mu(B1)-4pi/3|=" +
                 num(vol) + " (tol 1e-6)";
  return res;
}

// 2 ----------------------------------------------------------------------
Result bubbles() {
  Result res;
  double residual = 0.0, pdev = 0.0, kmax = -INFINITY;
  for (int d : {3, 4, 5, 6}) {
    const double b = 0.125;
    const auto s = bubble(d, b);
    const auto eq = equation_residual(s);
    for (std::size_t i = 0; i < eq.size() && s.u.grid()[i] <= 50; ++i) residual = std::max(residual, std::abs(eq[i]));
    const auto data = v_transform(s);
    const auto& g = data.v.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
      pdev = std::max(pdev, std::abs(data.P[i] - 2 * b * d));
      if (g[i] > 0.0) kmax = std::max(kmax, k_functional(data, g[i]));
    }
  }
  const auto l = log_bubble(0.125);
  double lres = 0.0, ldev = 0.0;
  const auto leq = equation_residual(l);
  for (std::size_t i = 0; i < leq.size() && l.u.grid()[i] <= 50; ++i) lres = std::max(lres, std::abs(leq[i]));
  for (double P : v_transform(l).P.values()) ldev = std::max(ldev, std::abs(P - 0.5));
  res.require(residual <= 1e-8, "bubble residual <= 1e-8");
  res.require(pdev <= 1e-8, "max|P - 2bd| <= 1e-8");
  res.require(kmax <= 1e-8, "k[v] <= 1e-8");
  res.require(lres <= 1e-8, "log bubble residual <= 1e-8");
  res.require(ldev <= 1e-8, "log bubble |P - 1/2| <= 1e-8");
  res.measured = "residual=" + num(residual) + ", max|P-2bd|=" + num(pdev) + ", max k=" + num(kmax) +
                 ", log residual=" + num(lres) + ", log |P-1/2|=" + num(ldev) + " (all tol 1e-8)";
  return res;
}

// 3 ----------------------------------------------------------------------
Result theorem_suite() {
  Result res;
  double worst_K = -INFINITY, worst_iii = 0.0;
  for (const auto& c : theorem_cases()) {
    const auto ex = build_example(c.d, c.alpha);
    const auto rep = verify_theorem(ex, c.p, c.ell);
    const std::string tag = "(" + std::to_string(c.d) + "," + num(c.alpha) + "," + num(c.p) + "," + num(c.ell) + ")";
    for (const auto& chk : rep.checks()) res.require(chk.pass, tag + " " + chk.name);
    res.require(rep.profile && rep.profile->r_end >= 1000.0, tag + " solution reaches r_max = 1000");
    worst_K = std::max(worst_K, rep.max_K);
    worst_iii = std::max(worst_iii, rep.conditions.weight_residual_ratio);
  }
  res.measured = "4 cases, max K=" + num(worst_K) + " (tol 1e-8), condition iii residual/(100h^2)=" + num(worst_iii) +
                 " (tol 1)";
  return res;
}

// 4 ----------------------------------------------------------------------
// Classical RK4 on u'' + (3/r) u' + u^3 = 0 (the d = 4, p = 3 radial equation),
// started at r = h from the Taylor series u = 1 - r^2/8 + r^4/64 - r^6/512.
std::vector<double> rk4_oracle(double h, int steps) {
  auto rhs = [](double r, double u, double v, double& du, double& dv) {
    du = v;
    dv = -3 / r * v - u * u * u;
  };
  double u = 1 - h * h / 8 + std::pow(h, 4) / 64 - std::pow(h, 6) / 512;
  double v = -h / 4 + std::pow(h, 3) / 16 - 6 * std::pow(h, 5) / 512;
  std::vector<double> out{1.0, u};
  for (int k = 1; k < steps; ++k) {
    const double r = k * h;
    double a1, b1, a2, b2, a3, b3, a4, b4;
    rhs(r, u, v, a1, b1);
    rhs(r + h / 2, u + h / 2 * a1, v + h / 2 * b1, a2, b2);
    rhs(r + h / 2, u + h / 2 * a2, v + h / 2 * b2, a3, b3);
    rhs(r + h, u + h * a3, v + h * b3, a4, b4);
    u += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
    v += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
    out.push_back(u);
  }
  return out;
}

Result solver_order() {
  Result res;
  const std::size_t nodes = 21;
  const auto g = make_grid(0, 10, nodes, Spacing::uniform);
  const double h = g[1];
  // Fixed-step oracle at 10x the grid resolution, Richardson-corrected with a 20x pass.
  const auto coarse = rk4_oracle(h / 10, static_cast<int>((nodes - 1) * 10));
  const auto fine = rk4_oracle(h / 20, static_cast<int>((nodes - 1) * 20));
  std::vector<double> oracle(nodes);
  double oracle_err = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    oracle[i] = (16 * fine[i * 20] - coarse[i * 10]) / 15;
    oracle_err = std::max(oracle_err, std::abs(oracle[i] - 1 / (1 + g[i] * g[i] / 8)));
  }
  const auto m = euclidean_manifold(4, g);
  std::vector<double> lt, le;
  std::string ratios;
  double prev = 0.0, tol = 1e-5;
  for (int k = 0; k < 4; ++k, tol /= 16) {
    const auto s = solve_radial(m, 3.0, 1.0, 10.0, {tol});
    double err = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) err = std::max(err, std::abs(s.u[i] - oracle[i]));
    if (k > 0) ratios += (k > 1 ? "," : "") + num(prev / err);
    prev = err;
    lt.push_back(std::log(tol));
    le.push_back(std::log(err));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lt.size(); ++i) mx += lt[i], my += le[i];
  mx /= lt.size();
  my /= lt.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lt.size(); ++i) sxy += (lt[i] - mx) * (le[i] - my), sxx += (lt[i] - mx) * (lt[i] - mx);
  const double factor = std::pow(16.0, sxy / sxx);
  res.require(factor >= 8.0, "error shrink per 16x tol >= 8");
  res.require(oracle_err <= 0.1 * std::exp(le.back()), "oracle error well below the smallest measured error");
  res.measured = "fitted shrink per 16x tol=" + num(factor) + " (tol >= 8), pairwise [" + ratios +
                 "], oracle error=" + num(oracle_err);
  return res;
}

// 5 ----------------------------------------------------------------------
Result gaussian_witness() {
  Result res;
  const auto m = quadratic_weight_manifold(3, make_grid(0, 20, 2001, Spacing::uniform), 1.0);
  std::string zeros;
  for (double ell : {0.5, 1.0, 2.0}) {
    const auto s = solve_radial(m, 3.0, ell, 20.0);
    res.require(s.status == SolveStatus::crossed_zero && std::isfinite(s.r_end) && s.r_end > 0.0,
                "crossed zero for ell=" + num(ell));
    zeros += (zeros.empty() ? "" : ", ") + s.status_string();
  }
  res.measured = zeros;
  return res;
}

// 6 ----------------------------------------------------------------------
Result example2() {
  Result res;
  const auto g = make_grid(0, 1000, 4096, Spacing::geometric);
  const auto m = log_tail_manifold(3, g, 2.0);
  const auto cmp = comparison_report(m, 1000.0);
  res.require(cmp.tail_exponent < -1.0 && std::isfinite(cmp.parabolicity_integral), "tail exponent < -1");
  std::size_t rises = 0;
  double prev = INFINITY;
  for (std::size_t i = g.lower_index(10.0); i < g.size(); ++i) {
    const double ratio = weighted_volume(m, g[i]) / std::pow(g[i], 4.0);  // 2p/(p-1) = 4 at p = 2
    rises += ratio >= prev ? 1 : 0;
    prev = ratio;
  }
  res.require(rises == 0, "mu(B_R)/R^4 decreasing on [10, 1000]");
  res.measured = "tail exponent=" + num(cmp.tail_exponent) + " (tol < -1), parabolicity integral=" +
                 num(cmp.parabolicity_integral) + ", non-decreasing steps=" + std::to_string(rises);
  return res;
}

// 7 ----------------------------------------------------------------------
double divergence_ratio(const PFunctionData& data) {
  const auto res = divergence_identity_residual(data);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) worst = std::max(worst, res[i] / grid_tolerance(res.grid(), i, 100.0));
  return worst;
}

Result identities() {
  Result res;
  double div = 0.0, ibp = 0.0, keq = 0.0;
  std::vector<PFunctionData> all;
  for (int d : {3, 4, 5, 6}) all.push_back(v_transform(bubble(d, 0.125)));
  all.push_back(v_transform(log_bubble(0.125)));
  for (const auto& c : theorem_cases()) {
    const auto ex = build_example(c.d, c.alpha);
    all.push_back(v_transform(solve_radial(ex.manifold, c.p, c.ell, 1000.0), VirtualDimension::infinity()));
  }
  for (const auto& data : all) {
    div = std::max(div, divergence_ratio(data));
    for (double q : {0.0, 2.0, data.m / 2 + 1}) {
      const auto r = ibp_identity(data, q, 2.0);
      ibp = std::max(ibp, r.residual / r.scale);
    }
  }
  // Analytic data with a nontrivial weight: bubble profiles read on weighted models.
  const auto g = make_grid(0, 100, 2048, Spacing::geometric);
  for (int d : {3, 4, 6}) {
    const auto b = bubble(d, 0.125, g);
    for (const auto& m : {quadratic_weight_manifold(d, g, 0.3), log_tail_manifold(d, g, 2.0)}) {
      for (auto n : {VirtualDimension::finite(d + 0.5), VirtualDimension::finite(2.0 * d), VirtualDimension::infinity()}) {
        auto data = v_transform(b, n);
        data.manifold = m;
        for (std::size_t i = 1; i < g.size(); i += 3) {
          const double k = k_functional(data, g[i]);
          keq = std::max(keq, std::abs(k - k_decomposed(data, g[i])) / std::max(1.0, std::abs(k)));
        }
      }
    }
  }
  res.require(div <= 1.0, "divergence identity residual <= 100 h^2");
  res.require(ibp <= ibp_tolerance, "ibp residual <= quadrature tolerance");
  res.require(keq <= 1e-8, "four-term k decomposition within 1e-8");
  res.measured = "divergence residual/(100h^2)=" + num(div) + " (tol 1), ibp relative residual=" + num(ibp) +
                 " (tol " + num(ibp_tolerance) + "), k decomposition gap=" + num(keq) + " (tol 1e-8)";
  return res;
}

// 8 ----------------------------------------------------------------------
Result estimates() {
  Result res;
  const auto radii = radii_1_100();
  const auto s = bubble(4, 0.125);
  const auto data = v_transform(s);
  std::string out;
  for (double q : {2.0, data.m / 2 + 1}) {
    std::vector<double> ratios;
    for (const auto& e : integral_estimate_sweep(data, q, radii)) ratios.push_back(e.ratio());
    const double sl = tail_slope(ratios);
    res.require(sl <= sweep_slope_tolerance, "integral estimate q=" + num(q) + " bounded");
    out += "estimate q=" + num(q) + " tail slope=" + num(sl) + ", ";
  }
  double cy = -INFINITY;
  for (int d : {3, 4, 5, 6}) cy = std::max(cy, tail_slope(cheng_yau_sweep(bubble(d, 0.125), d, radii)));
  for (const auto& c : theorem_cases()) {
    const auto ex = build_example(c.d, c.alpha);
    cy = std::max(cy, tail_slope(cheng_yau_sweep(solve_radial(ex.manifold, c.p, c.ell, 1000.0), c.d, radii)));
  }
  res.require(cy <= sweep_slope_tolerance, "Cheng-Yau ratio bounded");
  double margin = INFINITY;
  for (int d : {3, 4, 5, 6}) {
    const auto f = superharmonic_floor_check(bubble(d, 0.125), d, 1.0);
    res.require(f.holds, "superharmonic floor kappa=d=" + std::to_string(d));
    margin = std::min(margin, f.min_margin);
  }
  res.measured = out + "Cheng-Yau tail slope=" + num(cy) + " (tol " + num(sweep_slope_tolerance) + " for every sweep), floor min margin=" + num(margin) + " (tol >= 0)";
  return res;
}

// 9 ----------------------------------------------------------------------
std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result determinism() {
  Result res;
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(BEL_CONFIG_DIR)) {
    if (e.path().extension() == ".cfg") configs.push_back(e.path());
  }
  std::sort(configs.begin(), configs.end());
  res.require(!configs.empty(), "scenario configs found in " BEL_CONFIG_DIR);
  const auto root = fs::temp_directory_path() / ("bel-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream log;
  std::size_t reports = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& c : configs) {
      // The second pass runs sweeps on a worker pool.
      const int code = run_config_file(c, {root / std::to_string(pass) / c.stem(), std::nullopt, pass == 0 ? 1 : 4}, log);
      res.require(code == exit_pass, c.filename().string() + " exit " + std::to_string(code));
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(root / "0")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "0");
    const auto other = root / "1" / rel;
    if (e.path().filename() == "report.json") {
      auto a = nlohmann::ordered_json::parse(read_all(e.path()));
      auto b = nlohmann::ordered_json::parse(read_all(other));
      a.erase("timings");
      b.erase("timings");
      res.require(a.dump(2) == b.dump(2), "identical " + rel.string());
      ++reports;
    } else {
      res.require(read_all(e.path()) == read_all(other), "identical " + rel.string());
    }
  }
  fs::remove_all(root);
  res.measured = std::to_string(configs.size()) + " configs, " + std::to_string(reports) +
                 " report.json pairs compared without timings";
  return res;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Euclidean sanity", 1.0, euclidean_sanity},
      {2, "Bubble verification", 4.0, bubbles},  // 1 s per dimension, four dimensions
      {3, "Explicit-warping suite", 120.0, theorem_suite},  // 30 s per case, four cases
      {4, "Solver order check", 10.0, solver_order},
      {5, "Gaussian-weight zero crossing", 10.0, gaussian_witness},
      {6, "Log-tail non-parabolic", 5.0, example2},
      {7, "Identity suite", 10.0, identities},
      {8, "Estimate sweeps", 30.0, estimates},
      {9, "Determinism", 600.0, determinism},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.time_limit) r.require(false, "time " + num(secs) + " s over limit " + num(c.time_limit) + " s");
    all = all && r.pass;
    std::printf("criterion %d %-30s %s  %s; time=%.2fs (limit %gs)\n", c.id, c.title.c_str(), r.pass ? "PASS" : "FAIL",
                r.measured.c_str(), secs, c.time_limit);
    for (const auto& n : r.notes) std::printf("    %s\n", n.c_str());
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
