#include "bel/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "bel/construction.hpp"
#include "bel/error.hpp"
#include "bel/pfunction.hpp"

namespace bel {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config text

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.push_back(trim(std::string_view(value).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void config_error(const ConfigEntry* e, const std::string& what) {
  if (e) throw Error(ErrorKind::config_parse_error, "line " + std::to_string(e->line) + ", key '" + e->key + "': " + what);
  throw Error(ErrorKind::config_parse_error, what);
}

}  // namespace

const ConfigEntry* ScenarioConfig::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::string ScenarioConfig::scenario() const {
  const auto* e = find("scenario");
  return e ? e->value : std::string();
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  for (auto& e : entries) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  entries.push_back({key, value, 0});
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string::npos) throw Error(ErrorKind::config_parse_error, where + ": expected key = value");
    ConfigEntry e{trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)), line_no};
    if (e.key.empty()) throw Error(ErrorKind::config_parse_error, where + ": empty key");
    if (e.value.empty()) throw Error(ErrorKind::config_parse_error, where + ", key '" + e.key + "': empty value");
    if (cfg.find(e.key)) throw Error(ErrorKind::config_parse_error, where + ": duplicate key '" + e.key + "'");
    cfg.entries.push_back(std::move(e));
  }
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<ScenarioConfig> expand_sweeps(const ScenarioConfig& config) {
  std::vector<ScenarioConfig> runs{ScenarioConfig{}};
  for (const auto& e : config.entries) {
    const auto items = e.key == "out_dir" ? std::vector<std::string>{e.value} : split_list(e.value);
    for (const auto& item : items) {
      if (item.empty()) config_error(&e, "empty item in list");
    }
    std::vector<ScenarioConfig> next;
    next.reserve(runs.size() * items.size());
    for (const auto& r : runs) {
      for (const auto& item : items) {
        auto copy = r;
        copy.entries.push_back({e.key, item, e.line});
        next.push_back(std::move(copy));
      }
    }
    runs = std::move(next);
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Catalog and typed access

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog{
      {"euclidean-sanity", "flat R^d: vanishing curvature, r Lr = d-1, volume of the unit ball", {"d"}, {}},
      {"bubble", "Aubin-Talenti bubble: equation residual, constant P, k = 0, identities", {"d"}, {"b"}},
      {"log-bubble", "Liouville log bubble on R^2: residual, P = 4b, identities, lower bound", {}, {"b"}},
      {"theorem-2-2",
       "explicit concave warping with its induced weight: curvature, Pohozaev, global positive solution",
       {"d", "alpha", "p", "ell"},
       {"n"}},
      {"soliton-liouville", "Gaussian weight f = coef r^2, psi = r: the radial solution crosses zero", {"d", "p", "ell"},
       {"coef"}},
      {"example-2-parabolicity", "log-tail weight: non-parabolic tail and decreasing volume ratio", {"beta"},
       {"d", "p"}},
      {"estimates-sweep", "integral estimate and Cheng-Yau ratio sweeps over R in [1, 100]", {},
       {"d", "b", "alpha", "ell"}},
      {"custom", "solve on a chosen model manifold and report", {"manifold", "d", "ell"},
       {"nonlinearity", "p", "coef", "beta", "alpha", "expect"}},
  };
  return catalog;
}

namespace {

const std::vector<std::string> common_keys{"scenario", "grid.r_max", "grid.nodes", "grid.spacing", "tol", "out_dir"};

const ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : scenario_catalog()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

class Params {
 public:
  explicit Params(const ScenarioConfig& cfg) : cfg_(cfg) {}

  bool has(std::string_view key) const { return cfg_.find(key) != nullptr; }

  double real(std::string_view key, std::optional<double> fallback = std::nullopt) const {
    const auto* e = cfg_.find(key);
    if (!e) {
      if (fallback) return *fallback;
      config_error(nullptr, "missing required key '" + std::string(key) + "'");
    }
    return parse_real(e);
  }

  int integer(std::string_view key, std::optional<int> fallback = std::nullopt) const {
    const auto* e = cfg_.find(key);
    if (!e) {
      if (fallback) return *fallback;
      config_error(nullptr, "missing required key '" + std::string(key) + "'");
    }
    int out = 0;
    const char* end = e->value.data() + e->value.size();
    auto [ptr, ec] = std::from_chars(e->value.data(), end, out);
    if (ec != std::errc() || ptr != end) config_error(e, "expected an integer, got '" + e->value + "'");
    return out;
  }

  std::string text(std::string_view key, std::optional<std::string> fallback = std::nullopt) const {
    const auto* e = cfg_.find(key);
    if (!e) {
      if (fallback) return *fallback;
      config_error(nullptr, "missing required key '" + std::string(key) + "'");
    }
    return e->value;
  }

  /// p accepts "critical" for (d+2)/(d-2).
  double exponent(std::optional<double> fallback = std::nullopt) const {
    const auto* e = cfg_.find("p");
    if (e && e->value == "critical") {
      const int d = integer("d");
      if (d < 3) config_error(e, "critical exponent needs d >= 3");
      return critical_exponent(d);
    }
    return real("p", fallback);
  }

  VirtualDimension virtual_dimension(VirtualDimension fallback) const {
    const auto* e = cfg_.find("n");
    if (!e) return fallback;
    if (e->value == "inf" || e->value == "infinity") return VirtualDimension::infinity();
    return VirtualDimension::finite(parse_real(e));
  }

  RadialGrid grid(double r_max, std::size_t nodes, Spacing spacing) const {
    const double rm = real("grid.r_max", r_max);
    const int n = integer("grid.nodes", static_cast<int>(nodes));
    Spacing sp = spacing;
    if (const auto* e = cfg_.find("grid.spacing")) {
      if (e->value == "uniform") {
        sp = Spacing::uniform;
      } else if (e->value == "geometric") {
        sp = Spacing::geometric;
      } else {
        config_error(e, "spacing must be uniform or geometric");
      }
    }
    if (n < 0) config_error(cfg_.find("grid.nodes"), "node count must be positive");
    try {
      return make_grid(0.0, rm, static_cast<std::size_t>(n), sp);
    } catch (const Error& err) {
      config_error(cfg_.find("grid.nodes"), err.what());
    }
  }

  SolverOptions solver() const { return {real("tol", 1e-10), 0.0}; }

 private:
  static double parse_real(const ConfigEntry* e) {
    double out = 0.0;
    const char* end = e->value.data() + e->value.size();
    auto [ptr, ec] = std::from_chars(e->value.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
      config_error(e, "expected a real number, got '" + e->value + "'");
    }
    return out;
  }

  const ScenarioConfig& cfg_;
};

}  // namespace

void validate_config(const ScenarioConfig& config) {
  const auto* scen = config.find("scenario");
  if (!scen) config_error(nullptr, "missing required key 'scenario'");
  const auto* info = find_scenario(scen->value);
  if (!info) config_error(scen, "unknown scenario '" + scen->value + "'");
  for (const auto& e : config.entries) {
    const auto known = [&](const std::vector<std::string>& keys) {
      return std::find(keys.begin(), keys.end(), e.key) != keys.end();
    };
    if (!known(common_keys) && !known(info->required) && !known(info->optional)) {
      config_error(&e, "unknown key for scenario " + info->name);
    }
  }
  for (const auto& k : info->required) {
    if (!config.find(k)) config_error(nullptr, "scenario " + info->name + " requires key '" + k + "'");
  }
  // Type-check every value that has a fixed type.
  Params p(config);
  for (const char* k : {"d", "grid.nodes"}) {
    if (p.has(k)) p.integer(k);
  }
  for (const char* k : {"alpha", "ell", "b", "beta", "coef", "tol", "grid.r_max"}) {
    if (p.has(k)) p.real(k);
  }
  if (p.has("p")) p.exponent();
  if (p.has("n")) p.virtual_dimension({});
  if (p.has("grid.spacing")) p.grid(1.0, 16, Spacing::uniform);
  if (p.has("tol") && !(p.real("tol") > 0.0)) config_error(config.find("tol"), "tol must be positive");
  if (const auto* e = config.find("manifold")) {
    const std::vector<std::string> kinds{"euclidean", "quadratic-weight", "log-tail", "explicit-warping"};
    if (std::find(kinds.begin(), kinds.end(), e->value) == kinds.end()) {
      config_error(e, "manifold must be one of euclidean, quadratic-weight, log-tail, explicit-warping");
    }
  }
  if (const auto* e = config.find("nonlinearity")) {
    if (e->value != "lane-emden" && e->value != "liouville") config_error(e, "nonlinearity must be lane-emden or liouville");
  }
  if (const auto* e = config.find("expect")) {
    if (e->value != "global-positive" && e->value != "crossed-zero" && e->value != "any") {
      config_error(e, "expect must be global-positive, crossed-zero or any");
    }
  }
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

void emit_profiles(const std::vector<ProfileColumn>& columns, const fs::path& path) {
  std::vector<const ProfileColumn*> used;
  for (const auto& c : columns) {
    if (!c.values.empty()) used.push_back(&c);
  }
  if (used.empty()) throw Error(ErrorKind::io_error, "no profile data for " + path.string());
  const std::size_t rows = used.front()->values.size();
  for (const auto* c : used) {
    if (c->values.size() != rows) throw Error(ErrorKind::io_error, "column " + c->name + " has a different length");
  }
  std::string out;
  for (std::size_t j = 0; j < used.size(); ++j) out += (j ? "," : "") + used[j]->name;
  out += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (j) out += ',';
      out += format_double(used[j]->values[i]);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << out) || !f.flush()) throw Error(ErrorKind::io_error, "cannot write " + path.string());
}

json RunReport::to_json(bool with_timings) const {
  json j;
  j["schema"] = 1;
  j["scenario"] = scenario;
  j["config"] = config;
  j["status"] = passed() ? "pass" : "fail";
  json arr = json::array();
  for (const auto& c : checks) {
    json item;
    item["name"] = c.name;
    item["reference"] = c.reference;
    item["verdict"] = c.pass ? "pass" : "fail";
    item["value"] = c.value;
    item["tolerance"] = c.tolerance;
    arr.push_back(std::move(item));
  }
  j["checks"] = std::move(arr);
  j["details"] = details;
  if (with_timings) j["timings"] = {{"total_seconds", seconds}};
  return j;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

struct Outcome {
  std::vector<Check> checks;
  json details = json::object();
  std::vector<ProfileColumn> columns;
};

std::vector<double> log_radii(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const int steps = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  for (int k = 0; k <= steps; ++k) out.push_back(lo * std::pow(10.0, static_cast<double>(k) / per_decade));
  return out;
}

std::vector<double> nodes_of(const RadialGrid& g) { return {g.nodes().begin(), g.nodes().end()}; }

// Ric_inf components at every node, with the pole limits (-(d-1) psi'''(0) + f''(0), 0).
void add_curvature_columns(const ModelManifold& m, std::size_t count, Outcome& out) {
  std::vector<double> rr(count), rt(count);
  const int d = m.dimension();
  for (std::size_t i = 0; i < count; ++i) {
    const double r = m.grid()[i];
    if (r > 0.0) {
      const auto ric = ric_infinity_components(m, r);
      rr[i] = ric.radial;
      rt[i] = ric.angular;
    } else {
      rr[i] = -(d - 1) * m.psi(0.0, 3) + m.f(0.0, 2);
      rt[i] = 0.0;
    }
  }
  out.columns.push_back({"ric_r", std::move(rr)});
  out.columns.push_back({"ric_theta", std::move(rt)});
}

void add_v_columns(const PFunctionData& data, Outcome& out) {
  out.columns.push_back({"v", {data.v.values().begin(), data.v.values().end()}});
  out.columns.push_back({"P", {data.P.values().begin(), data.P.values().end()}});
}

void add_u_columns(const SolutionProfile& s, Outcome& out) {
  out.columns.push_back({"r", nodes_of(s.u.grid())});
  out.columns.push_back({"u", {s.u.values().begin(), s.u.values().end()}});
  out.columns.push_back({"u_prime", s.u.samples(1)});
}

Check divergence_check(const PFunctionData& data) {
  const auto res = divergence_identity_residual(data);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) worst = std::max(worst, res[i] / grid_tolerance(res.grid(), i, 100.0));
  return {"divergence-identity", "m v^(1-m) k[v] = div_f(v^(2-m) P'), residual / (100 h^2)", worst <= 1.0, worst, 1.0};
}

Check ibp_check(const PFunctionData& data, double q, double R) {
  const auto ibp = ibp_identity(data, q, R);
  const double rel = ibp.residual / ibp.scale;
  return {"ibp-identity-q=" + format_double(q),
          "(m/2+1-q) int e^-f v^-q v'^2 phi^2 + c_m int e^-f v^-q phi^2 = -int e^-f v^(1-q) v' (phi^2)'",
          rel <= ibp_tolerance, rel, ibp_tolerance};
}

Check floor_check(const SolutionProfile& s, double kappa, double R) {
  const auto f = superharmonic_floor_check(s, kappa, R);
  return {"superharmonic-floor-kappa=" + format_double(kappa), "u(r) >= R^(kappa-2) u(R) r^(2-kappa) for r >= R",
          f.holds, f.min_margin, 0.0};
}

// Bounded in R: the ratio flattens over the final decade of the sweep.
Check sweep_check(const std::string& name, const std::string& reference, const std::vector<double>& radii,
                  const std::vector<double>& values, json& details) {
  details[name] = values;
  const double slope = sweep_tail_slope(radii, values);
  return {name, reference + "; log-log slope over R in [10,100] <= " + format_double(sweep_slope_tolerance),
          slope <= sweep_slope_tolerance, slope, sweep_slope_tolerance};
}

double sup_abs_residual(const SolutionProfile& s, double r_cap) {
  const auto res = equation_residual(s);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size() && s.u.grid()[i] <= r_cap; ++i) worst = std::max(worst, std::abs(res[i]));
  return worst;
}

Outcome euclidean_sanity(const Params& p) {
  const int d = p.integer("d");
  if (d < 2) config_error(nullptr, "euclidean-sanity needs d >= 2");
  const auto g = p.grid(10.0, 1001, Spacing::uniform);
  const auto m = euclidean_manifold(d, g);
  Outcome out;
  double ric_r = 0.0, ric_t = 0.0, lr = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto ric = ric_infinity_components(m, g[i]);
    ric_r = std::max(ric_r, std::abs(ric.radial));
    ric_t = std::max(ric_t, std::abs(ric.angular));
    lr = std::max(lr, std::abs(m.drift(g[i]) * g[i] - (d - 1)));
  }
  out.checks.push_back({"ric-radial-zero", "|Ric^r| = |-(d-1) psi''/psi + f''| = 0", ric_r <= 1e-10, ric_r, 1e-10});
  out.checks.push_back({"ric-angular-zero", "|Ric^theta| = |-psi'' psi + (d-2)(1-psi'^2) + psi psi' f'| = 0",
                        ric_t <= 1e-10, ric_t, 1e-10});
  out.checks.push_back({"distance-laplacian", "r Lr = d-1", lr <= 1e-12, lr, 1e-12});
  if (g.r_max() >= 1.0) {
    const double vol = weighted_volume(m, 1.0);
    const double err = std::abs(vol - unit_sphere_area(d) / d);
    out.checks.push_back({"unit-ball-volume", "mu(B_1) = |S^(d-1)|/d", err <= 1e-6, err, 1e-6});
    out.details["unit_ball_volume"] = vol;
  }
  const auto cmp = comparison_report(m, g.r_max());
  out.checks.push_back({"sharp-laplacian", "Lr <= (d-1)/r", cmp.sharp_laplacian_holds, cmp.max_violation,
                        sharp_comparison_tolerance});
  out.columns.push_back({"r", nodes_of(g)});
  add_curvature_columns(m, g.size(), out);
  return out;
}

Outcome bubble_scenario(const Params& p) {
  const int d = p.integer("d");
  const double b = p.real("b", 0.125);
  const auto s = bubble(d, b, p.grid(1000.0, 4096, Spacing::geometric));
  const auto data = v_transform(s);
  const auto& g = s.u.grid();
  Outcome out;
  const double res = sup_abs_residual(s, 50.0);
  out.checks.push_back({"pde-residual", "-Delta u - u^((d+2)/(d-2)) = 0 on r <= 50", res <= 1e-8, res, 1e-8});
  double dev = 0.0, kmax = 0.0, kgap = 0.0, wmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    dev = std::max(dev, std::abs(data.P[i] - 2 * b * d));
    if (g[i] <= 0.0) continue;
    const double k = k_functional(data, g[i]);
    kmax = std::max(kmax, k);
    kgap = std::max(kgap, std::abs(k - k_decomposed(data, g[i])));
    wmax = std::max(wmax, std::abs(w_functional(data, g[i])));
  }
  out.checks.push_back({"p-constant", "P = ((m/2) v'^2 + c_m)/v = 2bd", dev <= 1e-8, dev, 1e-8});
  out.checks.push_back({"k-vanishes", "k[v] = ||Hess v||^2 - (Lv)^2/m + Ric(v',v') <= 0", kmax <= 1e-8, kmax, 1e-8});
  out.checks.push_back({"k-decomposition",
                        "k[v] = ||Hess v - (Delta v/d) g||^2 + (m-n)/(mn) (Lv)^2 + ... + Ric_(n,d)(v',v')",
                        kgap <= 1e-8, kgap, 1e-8});
  out.checks.push_back({"w-functional", "W_f = (m-d)/m^2 (Delta v)^2 + Ric(v',v') = 0", wmax <= 1e-8, wmax, 1e-8});
  out.checks.push_back(divergence_check(data));
  const double R = std::min(10.0, g.r_max() / 2);
  for (double q : {0.0, 2.0, data.m / 2 + 1}) out.checks.push_back(ibp_check(data, q, R));
  out.checks.push_back(floor_check(s, d, 1.0));
  out.details["a"] = 1.0 / (d * (d - 2) * b);
  out.details["m"] = data.m;
  out.details["c_m"] = data.c_m;
  out.details["P0"] = data.P[0];
  add_u_columns(s, out);
  add_v_columns(data, out);
  return out;
}

Outcome log_bubble_scenario(const Params& p) {
  const double b = p.real("b", 0.125);
  const auto s = log_bubble(b, p.grid(1000.0, 4096, Spacing::geometric));
  const auto data = v_transform(s);
  const auto& g = s.u.grid();
  Outcome out;
  const double res = sup_abs_residual(s, 50.0);
  out.checks.push_back({"pde-residual", "-Delta u - e^u = 0 on r <= 50", res <= 1e-8, res, 1e-8});
  double dev = 0.0;
  for (double P : data.P.values()) dev = std::max(dev, std::abs(P - 4 * b));
  out.checks.push_back({"p-constant", "P = (|v'|^2 + 1/2)/v = 4b", dev <= 1e-8, dev, 1e-8});
  out.checks.push_back(divergence_check(data));
  const double R = std::min(10.0, g.r_max() / 2);
  for (double q : {0.0, 2.0}) out.checks.push_back(ibp_check(data, q, R));
  if (g.r_max() > 10.0) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = g.lower_index(10.0); i < g.size(); ++i) {
      const double r = g[i];
      margin = std::min(margin, s.u[i] + 4 * std::log(r * std::sqrt(std::log(r))));
    }
    out.checks.push_back({"log-lower-bound", "u >= -4 log(r G(r)^(1/2)), G = log, r >= 10", margin > 0.0, margin, 0.0});
  }
  out.details["a"] = 1.0 / (8 * b);
  add_u_columns(s, out);
  add_v_columns(data, out);
  return out;
}

Outcome theorem_scenario(const Params& p) {
  const int d = p.integer("d");
  const double alpha = p.real("alpha");
  const double ex_p = p.exponent();
  const double ell = p.real("ell");
  const auto n = p.virtual_dimension(VirtualDimension::infinity());
  const auto ex = build_example(d, alpha, 0.0, p.grid(1000.0, 4096, Spacing::geometric));
  const auto rep = verify_theorem(ex, ex_p, ell, p.solver());
  Outcome out;
  out.checks = rep.checks();
  auto& det = out.details;
  det["solver_status"] = rep.solver_status;
  if (!rep.solver_error.empty()) det["solver_error"] = rep.solver_error;
  det["C1"] = rep.C1;
  det["C2"] = rep.C2;
  det["bound_constant"] = rep.bound_constant;
  det["rough_constant"] = rep.rough_constant;
  det["max_K"] = rep.max_K;
  det["max_P"] = rep.max_P;
  det["min_chi"] = rep.min_chi;
  det["max_bound_excess"] = rep.max_bound_excess;
  det["max_iii_slack"] = rep.conditions.max_iii_slack;
  det["K_decomposition_gap"] = rep.K_decomposition_gap;
  det["chi_derivative_dominance_nodes"] = rep.chi_derivative_dominance_nodes;
  if (!rep.profile) {
    out.columns.push_back({"r", nodes_of(ex.manifold.grid())});
    add_curvature_columns(ex.manifold, ex.manifold.grid().size(), out);
    return out;
  }
  const auto& s = *rep.profile;
  det["r_end"] = s.r_end;
  det["accepted_steps"] = s.accepted_steps;
  det["rejected_steps"] = s.rejected_steps;

  if (s.status != SolveStatus::crossed_zero) {
    const auto data = v_transform(s, n);
    const auto& g = data.v.grid();
    out.checks.push_back(divergence_check(data));
    if (n.infinite || data.m > d || n.value == d) {
      const auto slack = fundamental_inequality_slack(data);
      const std::size_t first = data.manifold.first_regular_index();
      double worst = -std::numeric_limits<double>::infinity();
      std::size_t negative = 0;
      for (std::size_t j = 0; j < slack.size(); ++j) {
        const std::size_t i = first + j;
        if (w_functional(data, g[i]) < 0.0) {
          ++negative;
          continue;
        }
        worst = std::max(worst, slack[j] / grid_tolerance(g, i, 100.0));
      }
      out.checks.push_back({"fundamental-inequality",
                            "(1/2) P^-1 v^(2-m) P'^2 + m v^(1-m) W_f <= div_f(v^(2-m) P') where W_f >= 0, / (100 h^2)",
                            !(worst > 1.0), worst, 1.0});
      det["w_negative_nodes"] = negative;
    }
    if (s.r_end >= 200.0 && d > 2) {
      out.checks.push_back(sweep_check("cheng-yau-ratio",
                                       "sup_(B_R) u'^2/u^2 / (1/R^2 + sup_(B_2R) u^(4/(n-2))), n = d",
                                       log_radii(1.0, 100.0, 10), cheng_yau_sweep(s, d, log_radii(1.0, 100.0, 10)), det));
    }
    add_u_columns(s, out);
    add_v_columns(data, out);
  } else {
    add_u_columns(s, out);
  }
  const std::size_t count = s.u.size();
  add_curvature_columns(ex.manifold, count, out);
  std::vector<double> K(count, 0.0), P(count, 0.0), E(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = s.u.grid()[i];
    E[i] = energy(s, r);
    P[i] = pohozaev(ex.manifold, s, r);
    if (r > 0.0) K[i] = pohozaev_slope_factor(ex.manifold, ex_p, r);
  }
  out.columns.push_back({"K", std::move(K)});
  out.columns.push_back({"pohozaev", std::move(P)});
  out.columns.push_back({"energy", std::move(E)});
  return out;
}

Outcome soliton_scenario(const Params& p) {
  const int d = p.integer("d");
  const double coef = p.real("coef", 1.0);
  const auto g = p.grid(20.0, 2001, Spacing::uniform);
  const auto m = quadratic_weight_manifold(d, g, coef);
  const auto s = solve_radial(m, p.exponent(), p.real("ell"), g.r_max(), p.solver());
  Outcome out;
  const bool crossed = s.status == SolveStatus::crossed_zero && s.r_end > 0.0 && std::isfinite(s.r_end);
  out.checks.push_back({"zero-crossing", "u(r*) = 0 at a finite r* > 0 under f = coef r^2", crossed,
                        crossed ? s.r_end : std::numeric_limits<double>::infinity(), 0.0});
  out.details["status"] = s.status_string();
  out.details["r_end"] = s.r_end;
  out.details["u_prime_at_end"] = s.u_prime_at_end;
  add_u_columns(s, out);
  std::vector<double> E(s.u.size());
  for (std::size_t i = 0; i < E.size(); ++i) E[i] = energy(s, s.u.grid()[i]);
  out.columns.push_back({"energy", std::move(E)});
  return out;
}

Outcome example2_scenario(const Params& p) {
  const int d = p.integer("d", 3);
  const double beta = p.real("beta");
  const double ex_p = p.exponent(2.0);
  const auto g = p.grid(1000.0, 4096, Spacing::geometric);
  const auto m = log_tail_manifold(d, g, beta);
  const auto cmp = comparison_report(m, g.r_max());
  Outcome out;
  out.checks.push_back({"non-parabolic", "int^inf dr / (|S| e^-f psi^(d-1)) < inf: fitted tail exponent < -1",
                        !cmp.parabolic && std::isfinite(cmp.parabolicity_integral), cmp.tail_exponent, -1.0});
  const double e = 2 * ex_p / (ex_p - 1);
  std::vector<double> radii, ratio;
  for (std::size_t i = g.lower_index(10.0); i < g.size(); ++i) {
    radii.push_back(g[i]);
    ratio.push_back(weighted_volume(m, g[i]) / std::pow(g[i], e));
  }
  std::size_t rises = 0;
  for (std::size_t i = 1; i < ratio.size(); ++i) rises += ratio[i] >= ratio[i - 1] ? 1 : 0;
  out.checks.push_back({"volume-ratio-decreasing", "mu(B_R) / R^(2p/(p-1)) decreasing on R in [10, r_max]",
                        rises == 0 && !ratio.empty(), static_cast<double>(rises), 0.0});
  out.details["parabolicity_integral"] = cmp.parabolicity_integral;
  out.details["tail_exponent"] = cmp.tail_exponent;
  out.details["volume_ratio_first"] = ratio.empty() ? 0.0 : ratio.front();
  out.details["volume_ratio_last"] = ratio.empty() ? 0.0 : ratio.back();
  out.columns.push_back({"r", nodes_of(g)});
  add_curvature_columns(m, g.size(), out);
  return out;
}

Outcome estimates_scenario(const Params& p) {
  const int d = p.integer("d", 4);
  const double b = p.real("b", 0.125);
  const auto g = p.grid(1000.0, 4096, Spacing::geometric);
  if (g.r_max() < 200.0) config_error(nullptr, "estimates-sweep needs grid.r_max >= 200");
  const auto s = bubble(d, b, g);
  const auto data = v_transform(s);
  const auto radii = log_radii(1.0, 100.0, 10);
  Outcome out;
  out.details["radii"] = radii;
  for (double q : {2.0, data.m / 2 + 1}) {
    const auto sweep = integral_estimate_sweep(data, q, radii);
    std::vector<double> ratios;
    for (const auto& x : sweep) ratios.push_back(x.ratio());
    out.checks.push_back(sweep_check("integral-estimate-q=" + format_double(q),
                                     "int_(B_R) e^-f v^-q (...) / (mu(B_2R) R^-q)", radii, ratios, out.details));
  }
  out.checks.push_back(sweep_check("cheng-yau-bubble", "sup_(B_R) u'^2/u^2 / (1/R^2 + sup_(B_2R) u^(4/(n-2))), n = d",
                                   radii, cheng_yau_sweep(s, d, radii), out.details));
  out.checks.push_back(floor_check(s, d, 1.0));

  const double alpha = p.real("alpha", 0.5);
  const auto ex = build_example(d, alpha, 0.0, g);
  const auto t = solve_radial(ex.manifold, critical_exponent(d), p.real("ell", 1.0), g.r_max(), p.solver());
  out.details["theorem_status"] = t.status_string();
  if (t.status == SolveStatus::crossed_zero) {
    out.checks.push_back({"cheng-yau-theorem", "positive solution on the explicit example", false, t.r_end, 0.0});
  } else {
    out.checks.push_back(sweep_check("cheng-yau-theorem",
                                     "sup_(B_R) u'^2/u^2 / (1/R^2 + sup_(B_2R) u^(4/(n-2))), n = d, explicit example",
                                     radii, cheng_yau_sweep(t, d, radii), out.details));
  }
  add_u_columns(s, out);
  add_v_columns(data, out);
  return out;
}

Outcome custom_scenario(const Params& p) {
  const int d = p.integer("d");
  const auto g = p.grid(20.0, 2001, Spacing::uniform);
  const std::string kind = p.text("manifold");
  std::optional<ModelManifold> m;
  if (kind == "euclidean") {
    m = euclidean_manifold(d, g);
  } else if (kind == "quadratic-weight") {
    m = quadratic_weight_manifold(d, g, p.real("coef", 1.0));
  } else if (kind == "log-tail") {
    m = log_tail_manifold(d, g, p.real("beta", 2.0));
  } else {
    m = build_example(d, p.real("alpha", 0.5), 0.0, g).manifold;
  }
  const bool liouville = p.text("nonlinearity", "lane-emden") == "liouville";
  const double ex_p = liouville ? 0.0 : p.exponent();
  const auto s = liouville ? solve_liouville(*m, p.real("ell"), g.r_max(), p.solver())
                           : solve_radial(*m, ex_p, p.real("ell"), g.r_max(), p.solver());
  Outcome out;
  out.checks.push_back({"solver", "radial shooting completed", true, s.r_end, 0.0});
  const std::string expect = p.text("expect", "any");
  if (expect != "any") {
    const bool ok = expect == "crossed-zero" ? s.status == SolveStatus::crossed_zero
                                             : s.status != SolveStatus::crossed_zero;
    out.checks.push_back({"expected-status", "status is " + expect, ok, s.r_end, 0.0});
  }
  out.details["status"] = s.status_string();
  out.details["r_end"] = s.r_end;
  add_u_columns(s, out);
  add_curvature_columns(*m, s.u.size(), out);
  std::vector<double> E(s.u.size());
  for (std::size_t i = 0; i < E.size(); ++i) E[i] = energy(s, s.u.grid()[i]);
  if (!liouville) {
    try {
      const auto tr = pohozaev_trace(s);
      out.details["K_nonpositive"] = tr.K_nonpositive;
      out.details["P_nonpositive"] = tr.P_nonpositive;
      out.details["E_decreasing"] = tr.E_decreasing;
    } catch (const Error& e) {
      out.details["pohozaev"] = e.what();
    }
  }
  out.columns.push_back({"energy", std::move(E)});
  return out;
}

Outcome dispatch(const ScenarioConfig& cfg) {
  const Params p(cfg);
  const std::string name = cfg.scenario();
  if (name == "euclidean-sanity") return euclidean_sanity(p);
  if (name == "bubble") return bubble_scenario(p);
  if (name == "log-bubble") return log_bubble_scenario(p);
  if (name == "theorem-2-2") return theorem_scenario(p);
  if (name == "soliton-liouville") return soliton_scenario(p);
  if (name == "example-2-parabolicity") return example2_scenario(p);
  if (name == "estimates-sweep") return estimates_scenario(p);
  return custom_scenario(p);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw Error(ErrorKind::io_error, "cannot write " + path.string());
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const fs::path& out_dir) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.scenario = config.scenario();
  rep.config = json::object();
  for (const auto& e : config.entries) {
    if (e.key != "out_dir") rep.config[e.key] = e.value;
  }
  Outcome out;
  try {
    out = dispatch(config);
  } catch (const Error& e) {
    // Config errors surface to the caller; library failures become a failed check.
    if (e.kind() == ErrorKind::config_parse_error) throw;
    out.checks.push_back({"scenario-error", std::string(to_string(e.kind())), false,
                          std::numeric_limits<double>::quiet_NaN(), 0.0});
    out.details["error"] = e.what();
  }
  rep.checks = std::move(out.checks);
  rep.details = std::move(out.details);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
  if (!out.columns.empty()) emit_profiles(out.columns, out_dir / "profiles.csv");
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(out_dir / "report.json", rep.to_json().dump(2) + "\n");
  return rep;
}

int run_config_file(const fs::path& path, const RunOptions& opts, std::ostream& log) {
  std::vector<ScenarioConfig> runs;
  fs::path out_dir;
  try {
    auto cfg = load_config(path);
    if (opts.tol) cfg.set("tol", format_double(*opts.tol));
    if (opts.out) {
      out_dir = *opts.out;
    } else if (const auto* e = cfg.find("out_dir")) {
      out_dir = e->value;
    } else if (const char* env = std::getenv("BEL_OUT_DIR"); env && *env) {
      out_dir = env;
    } else {
      throw Error(ErrorKind::config_parse_error, "no output directory: set out_dir, --out or BEL_OUT_DIR");
    }
    runs = expand_sweeps(cfg);
    for (const auto& r : runs) validate_config(r);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return exit_config_error;
  }

  const bool sweep = runs.size() > 1;
  auto dir_of = [&](std::size_t i) {
    if (!sweep) return out_dir;
    std::string name = std::to_string(i);
    name.insert(0, name.size() < 3 ? 3 - name.size() : 0, '0');
    return out_dir / ("run-" + name);
  };

  std::vector<int> codes(runs.size(), exit_pass);
  std::vector<std::string> messages(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const auto rep = run_scenario(runs[i], dir_of(i));
        std::size_t failed = 0;
        for (const auto& c : rep.checks) failed += c.pass ? 0 : 1;
        codes[i] = rep.passed() ? exit_pass : exit_check_failure;
        messages[i] = rep.scenario + " -> " + dir_of(i).string() + ": " +
                      (rep.passed() ? "pass" : std::to_string(failed) + " check(s) failed");
        for (const auto& c : rep.checks) {
          if (!c.pass) messages[i] += "\n  FAIL " + c.name + " (value " + format_double(c.value) + ")";
        }
      } catch (const Error& e) {
        codes[i] = exit_config_error;
        messages[i] = std::string("error: ") + e.what();
      } catch (const std::exception& e) {
        codes[i] = exit_config_error;
        messages[i] = std::string("error: ") + e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = exit_pass;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    log << messages[i] << "\n";
    code = std::max(code, codes[i]);
  }
  return code;
}

}  // namespace bel
