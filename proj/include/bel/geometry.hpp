#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bel/parallel.hpp"
#include "bel/radial.hpp"

namespace bel {

/// Rotationally symmetric weighted manifold with a pole:
///   g = dr^2 + psi(r)^2 dtheta^2,   dmu = e^{-f(r)} dvol.
/// Immutable after construction. Node samples of psi, f and the volume
/// integral W(r) = int_0^r e^{-f} psi^{d-1} are cached at construction.
class ModelManifold {
 public:
  /// Validates psi(0)=0, psi'(0)=1, psi'>0 on r>0 and f'(0)=0; the grid must start at the pole.
  ModelManifold(int d, RadialFunction warping, RadialFunction weight, bool weight_from_warping = false);

  int dimension() const { return d_; }
  const RadialGrid& grid() const { return warping_.grid(); }
  const RadialFunction& warping() const { return warping_; }
  const RadialFunction& weight() const { return weight_; }
  double f0() const { return weight_[0]; }
  /// True when f was produced by weight_from_warping, i.e. obeys f'' + 2(psi'/psi) f' = (d-1) psi''/psi.
  bool weight_from_warping() const { return from_warping_; }

  double psi(double r, int order = 0) const { return warping_.at(r, order); }
  double f(double r, int order = 0) const { return weight_.at(r, order); }

  /// Node samples: psi^(k) for k = 0..2, f^(k) for k = 0..2.
  std::span<const double> psi_nodes(int order) const { return psi_[static_cast<std::size_t>(order)]; }
  std::span<const double> f_nodes(int order) const { return f_[static_cast<std::size_t>(order)]; }

  /// Radius below which quotients by psi are replaced by their series limits (3 h_0).
  double series_radius() const { return series_radius_; }
  /// First node with r >= series_radius().
  std::size_t first_regular_index() const { return first_regular_; }

  /// L r = (d-1) psi'/psi - f' at r > 0.
  double drift(double r) const;
  /// d/dr of drift(r).
  double drift_derivative(double r) const;
  /// e^{-f} psi^{d-1}.
  double density(double r) const;
  /// W(r) = int_0^r e^{-f} psi^{d-1} ds on the grid (density as derivative samples).
  const RadialFunction& volume_integral() const { return volume_; }
  /// int_0^r (psi')^2 ds on the grid.
  const RadialFunction& warping_energy() const { return psi_energy_; }

 private:
  int d_;
  RadialFunction warping_;
  RadialFunction weight_;
  bool from_warping_;
  std::array<std::vector<double>, 3> psi_;
  std::array<std::vector<double>, 3> f_;
  RadialFunction volume_;
  RadialFunction psi_energy_;
  double series_radius_ = 0.0;
  std::size_t first_regular_ = 1;
};

/// Flat R^d: psi = r, f = 0 (analytic).
ModelManifold euclidean_manifold(int d, const RadialGrid& grid);
/// psi = r, f = coef r^2 (analytic). coef = 1 is the Gaussian shrinking soliton weight.
ModelManifold quadratic_weight_manifold(int d, const RadialGrid& grid, double coef);
/// psi = r with the smooth tail weight e^{-f} = (1+r^2)^{(2-d)/2} (log(e+r^2)/2)^beta,
/// which behaves like r^{2-d} log^beta r for r >> 1.
ModelManifold log_tail_manifold(int d, const RadialGrid& grid, double beta);

struct RicciComponents {
  double radial;   ///< coefficient of dr^2 in Ric_{inf,d}
  double angular;  ///< coefficient of dtheta^2 in Ric_{inf,d}
};

RicciComponents ric_infinity_components(const ModelManifold& m, double r);
/// Radial Bakry-Emery curvature with finite virtual dimension n > d.
double ric_n_radial(const ModelManifold& m, double n, double r);
/// w'' + (d-1)(psi'/psi) w' - f' w' at r > 0.
double weighted_laplacian_radial(const ModelManifold& m, const RadialFunction& w, double r);
/// Generic form (d-1) psi'/psi - f'.
double laplacian_of_distance(const ModelManifold& m, double r);
/// (d-1) int_0^r (psi')^2 / psi^2, valid for manifolds whose weight came from weight_from_warping.
double laplacian_of_distance_closed(const ModelManifold& m, double r);
/// |S^{d-1}| int_0^R e^{-f} psi^{d-1}.
double weighted_volume(const ModelManifold& m, double radius);

struct CurvatureReport {
  std::vector<double> r;
  std::vector<double> ric_r_inf;
  std::vector<double> ric_theta_inf;
  std::optional<double> n;
  std::vector<double> ric_r_n;
  double min_ric_r_inf = 0.0;
  double min_ric_theta_inf = 0.0;
  std::optional<double> min_ric_r_n;
};

/// Evaluated on nodes r >= series_radius().
CurvatureReport curvature_report(const ModelManifold& m, std::optional<double> n = std::nullopt,
                                 Exec exec = Exec::parallel);

struct ComparisonReport {
  std::vector<double> r;
  std::vector<double> laplacian;       ///< L r on the sampled nodes
  bool sharp_laplacian_holds = false;  ///< L r <= (d-1)/r at every sampled node
  double max_violation = 0.0;          ///< max of r L r - (d-1)
  double rough_constant = 0.0;         ///< least C with L r <= C/r on the grid
  double volume_constant = 0.0;        ///< least C with mu(B_R) <= C R^d for grid R >= 1
  double parabolicity_integral = 0.0;  ///< int dr / S(r) over [1, R_max]
  double tail_exponent = 0.0;          ///< log-log slope of 1/S(r) over the top decade
  bool parabolic = false;              ///< tail exponent >= -1
};

inline constexpr double sharp_comparison_tolerance = 1e-9;

ComparisonReport comparison_report(const ModelManifold& m, double r_max, Exec exec = Exec::parallel);

/// f(r) = f0 + (d-1) int_0^r [int_0^s psi'' psi] / psi^2(s) ds. The result
/// carries f' (from the nested quadrature) and f'' (5-point differences of f')
/// as derivative samples. Throws warping-not-concave unless psi'' < 0 on r > 0.
RadialFunction weight_from_warping(const RadialFunction& psi, int d, double f0);

/// Residual f'' + 2(psi'/psi) f' - (d-1) psi''/psi at each node r >= series_radius().
std::vector<double> warping_weight_residual(const ModelManifold& m);

/// Least-squares slope of log|y| against log r over nodes with r in [lo, hi].
double log_log_slope(std::span<const double> r, std::span<const double> y, double lo, double hi);

}  // namespace bel
