#pragma once

#include "finslerkit/common.hpp"
#include "finslerkit/minkowski.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace finslerkit {

enum class ManifoldKind { euclidean, sphere2, flat_torus2, finsler_plane };

std::string to_string(ManifoldKind kind);

/// Position-dependent norm on the plane:
///   F(x, v) = c(x) * base(R(rotation_rate * x_0) v),  c(x) = 1 + amplitude * exp(-|x|^2).
struct FinslerPlaneField {
  MinkowskiNorm base = MinkowskiNorm::quartic_blend(2, 0.5);
  double conformal_amplitude = 0.3;
  double rotation_rate = 0.5;
};

/// Raised when the Deng-Hou radius search rejects every lattice radius.
class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A built-in manifold with a (reversible) Finsler structure.
///
/// Point coordinates: euclidean and finsler_plane use R^n coordinates on a
/// box domain, sphere2 uses the embedding in R^3, flat_torus2 uses
/// coordinates in [0, p_0) x [0, p_1). Tangent vectors live in the same
/// coordinate space (ambient R^3 for the sphere).
class ManifoldSpec {
 public:
  static ManifoldSpec euclidean(const MinkowskiNorm& norm);
  static ManifoldSpec sphere2(double radius = 1.0);
  static ManifoldSpec flat_torus2(const Vec& periods, const Mat& metric);
  static ManifoldSpec flat_torus2();
  static ManifoldSpec finsler_plane(const FinslerPlaneField& field = {});

  ManifoldKind kind() const { return kind_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  int ambient_dim() const { return kind_ == ManifoldKind::sphere2 ? 3 : intrinsic_dim_; }
  bool is_riemannian() const;

  const MinkowskiNorm& euclidean_norm() const { return norm_; }
  double radius() const { return radius_; }
  const Vec& periods() const { return periods_; }
  const Mat& torus_metric() const { return metric_; }
  const FinslerPlaneField& field() const { return field_; }
  /// Box domain [lo, hi]^n for the euclidean and finsler_plane kinds.
  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }
  ManifoldSpec with_domain(double lo, double hi) const;

  /// F(x, .) as a norm on tangent coordinates (intrinsic coordinates; for the
  /// sphere, coordinates relative to tangent_frame(x)).
  MinkowskiNorm norm_at(const Vec& x) const;
  /// F(x, v) for a tangent vector v in coordinate representation.
  double speed(const Vec& x, const Vec& v) const;
  /// Coordinate metric tensor for the Riemannian coordinate kinds.
  Mat metric_at(const Vec& x) const;

  /// Linear frame I_x : R^n -> T_x M. Orthonormal for the center metric on
  /// Riemannian kinds, the coordinate frame otherwise.
  Mat tangent_frame(const Vec& x) const;

  /// Canonical representative (wraps torus coordinates, projects to the sphere).
  Vec normalize_point(const Vec& x) const;
  bool contains(const Vec& x, double tol = 1e-8) const;

  /// Geodesic distance: closed form for euclidean, sphere and torus; the
  /// integrated length of the straight coordinate segment for finsler_plane.
  double distance(const Vec& x, const Vec& y) const;
  /// Length of the straight chart segment from x to y by 8-point composite
  /// midpoint integration of F.
  double segment_length(const Vec& x, const Vec& y) const;
  /// Distance used for neighbor search in chart coordinates.
  double coordinate_distance(const Vec& x, const Vec& y) const;
  /// Coordinate displacement from x to y (shortest torus image; log map on
  /// the sphere expressed in ambient coordinates).
  Vec displacement(const Vec& x, const Vec& y) const;

  /// Upper bound of the biLipschitz radius search lattice.
  double injectivity_hint() const;
  double total_area() const;

  friend bool operator==(const ManifoldSpec& a, const ManifoldSpec& b);

 private:
  ManifoldSpec() = default;
  ManifoldKind kind_ = ManifoldKind::euclidean;
  int intrinsic_dim_ = 2;
  MinkowskiNorm norm_ = MinkowskiNorm::euclidean(2);
  double radius_ = 1.0;
  Vec periods_;
  Mat metric_;
  FinslerPlaneField field_;
  double domain_lo_ = 0.0;
  double domain_hi_ = 1.0;
};

struct GeodesicState {
  Vec position;
  Vec velocity;
};

/// Fixed-step RK4 integration of the geodesic equation; returns steps+1
/// states including the initial one.
std::vector<GeodesicState> integrate_geodesic(const ManifoldSpec& spec, const Vec& x, const Vec& v, double t,
                                              int steps);
Vec geodesic_shoot(const ManifoldSpec& spec, const Vec& x, const Vec& v, double t, int steps = 64);
Vec exp_map(const ManifoldSpec& spec, const Vec& x, const Vec& v, int steps = 64);
/// Closed-form sphere exponential.
Vec sphere_exp(double radius, const Vec& x, const Vec& v);
Vec sphere_log(double radius, const Vec& x, const Vec& y);

/// An exponential chart phi_i = (exp_{x_i} o I_i)^{-1} restricted to a ball.
struct ChartData {
  Vec center;
  double radius = 0.0;
  double bilip_constant = 1.0;  // 1 + r
  MinkowskiNorm chart_norm = MinkowskiNorm::euclidean(2);  // ||v||_i = F(x_i, I_i v)
  double equiv_constant = 1.0;  // C_i with |v|/C_i <= ||v||_i <= C_i |v|
  Mat frame;                    // I_i
  Mat frame_inverse;            // left inverse of I_i on T_{x_i} M
};

ChartData make_chart(const ManifoldSpec& spec, const Vec& center, double radius, double bilip_constant);
/// phi_i(x), chart coordinates of a manifold point.
Vec to_chart(const ManifoldSpec& spec, const ChartData& chart, const Vec& x);
/// phi_i^{-1}(u).
Vec from_chart(const ManifoldSpec& spec, const ChartData& chart, const Vec& u);
/// Smallest C >= 1 with |v|/C <= ||v|| <= C |v|, from dense Euclidean
/// unit-sphere sampling.
double equivalence_constant(const MinkowskiNorm& norm);

struct BilipschitzRadius {
  double radius = 0.0;
  double measured_distortion = 1.0;
};

/// Largest lattice radius R 2^-j (j = 0..20) at which the exponential chart
/// at x is (1+eps)-biLipschitz on `budget` sampled pairs, found by bisection
/// over j.
BilipschitzRadius bilipschitz_radius(const ManifoldSpec& spec, const Vec& x, double eps, int budget,
                                     std::uint64_t seed);
/// Distortion max(ratio, 1/ratio) of a chart on `budget` fresh pairs inside
/// the ball of the given radius.
double measure_chart_distortion(const ManifoldSpec& spec, const Vec& x, double radius, int budget,
                                std::uint64_t seed);

nlohmann::json to_json(const ManifoldSpec& spec);
ManifoldSpec manifold_from_json(const nlohmann::json& doc, const nlohmann::json& norm_library = {});

}  // namespace finslerkit
