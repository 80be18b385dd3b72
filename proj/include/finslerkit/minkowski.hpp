#pragma once

#include "finslerkit/common.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace finslerkit {

enum class NormFamily { euclidean, weighted_lp, quartic_blend, custom_table };

std::string to_string(NormFamily family);
NormFamily norm_family_from_string(const std::string& name);

/// A norm on one fiber R^n.
///
/// Every norm is a base family evaluated after an optional linear frame and
/// scale, F(v) = scale * base(frame * v). The frame lets a chart express
/// F(x, I v) for a linear isomorphism I without changing family.
///
///  - euclidean:     base(v) = sqrt(v^T G v) for a symmetric positive-definite G
///  - weighted_lp:   base(v) = (sum_i w_i |v_i|^p)^(1/p), p >= 1
///  - quartic_blend: base(v) = ((1 - theta) |v|_2^4 + theta |v|_4^4)^(1/4)
///  - custom_table:  dim 2 only; values h_j of the norm on the unit circle at
///                   angles 2 pi j / N, extended by |v| * h(angle(v)) with
///                   linear interpolation in angle
class MinkowskiNorm {
 public:
  static MinkowskiNorm euclidean(int dim);
  static MinkowskiNorm euclidean(const Mat& gram);
  static MinkowskiNorm weighted_lp(double p, const Vec& weights);
  static MinkowskiNorm lp(int dim, double p);
  static MinkowskiNorm quartic_blend(int dim, double theta);
  static MinkowskiNorm custom_table(std::vector<double> circle_values);

  /// v -> scale * F(frame * v).
  MinkowskiNorm transformed(const Mat& frame, double scale = 1.0) const;

  double operator()(const Vec& v) const;

  int dim() const { return dim_; }
  NormFamily family() const { return family_; }
  bool reversible() const { return reversible_; }

  double p() const { return p_; }
  double theta() const { return theta_; }
  const Vec& weights() const { return weights_; }
  const Mat& gram() const { return gram_; }
  const std::vector<double>& table() const { return table_; }
  /// Empty when no frame is applied.
  const Mat& frame() const { return frame_; }
  double scale() const { return scale_; }

  /// Inner-product norms: the parallelogram identity holds exactly.
  bool is_inner_product() const { return family_ == NormFamily::euclidean; }
  bool is_polyhedral() const { return family_ == NormFamily::weighted_lp && p_ == 1.0; }
  /// Families with analytic, positive-definite Hessians of F^2/2 everywhere
  /// off the origin.
  bool is_smooth_strongly_convex() const;

  /// Gradient and Hessian of F(v)^2 / 2. Analytic for the smooth families,
  /// central differences otherwise.
  Vec half_square_gradient(const Vec& v) const;
  Mat half_square_hessian(const Vec& v) const;

  friend bool operator==(const MinkowskiNorm& a, const MinkowskiNorm& b);

 private:
  MinkowskiNorm() = default;
  double base(const Vec& v) const;
  Vec base_half_square_gradient(const Vec& v) const;
  Mat base_half_square_hessian(const Vec& v) const;

  int dim_ = 0;
  NormFamily family_ = NormFamily::euclidean;
  bool reversible_ = true;
  double p_ = 2.0;
  double theta_ = 0.0;
  Vec weights_;
  Mat gram_;
  std::vector<double> table_;
  Mat frame_;
  double scale_ = 1.0;
};

/// F(v), with a dimension check.
double eval_norm(const MinkowskiNorm& norm, const Vec& v);

struct AxiomViolation {
  Vec sample;
  std::string axiom;  // positivity, homogeneity, triangle, reversibility, strong_convexity
  double residual = 0.0;
};

struct ConvexityReport {
  double min_hessian_eigenvalue = 0.0;
  std::vector<AxiomViolation> violations;
  bool passed = false;
};

struct ValidationOptions {
  double homogeneity_tol = 1e-9;  // relative
  double triangle_tol = 1e-9;     // absolute
  double reversibility_tol = 1e-9;
  /// F(v) at or below this multiple of |v|_2 counts as a positivity violation.
  double positivity_tol = 1e-12;
  /// Hessian eigenvalues of F^2 at or below this floor count as a
  /// strong-convexity violation.
  double hessian_floor = 1e-6;
};

/// Samples random nonzero vectors and checks positivity, homogeneity, the
/// triangle inequality, reversibility (if flagged), and positive
/// definiteness of the Richardson-extrapolated finite-difference Hessian of
/// F^2. The coordinate axes are always among the samples.
ConvexityReport validate_minkowski(const MinkowskiNorm& norm, int sample_count, std::uint64_t seed,
                                   const ValidationOptions& options = {});

struct DualNormResult {
  double value = 0.0;
  Vec maximizer;          // a vector with F(maximizer) = 1 attaining value
  double residual = 0.0;  // final angular step of the local ascent
};

/// sup{<omega, v> : F(v) <= 1} by unit-sphere sampling followed by a
/// projected pattern ascent. The value is attained by `maximizer`, so it is
/// a certified lower bound.
DualNormResult dual_norm_search(const MinkowskiNorm& norm, const Vec& omega);
double dual_norm(const MinkowskiNorm& norm, const Vec& omega);

/// F*(omega) through closed forms (euclidean, weighted_lp) or the Fenchel
/// identity F*^2/2 = sup_u <omega,u> - F(u)^2/2 solved by damped Newton
/// (quartic_blend). custom_table falls back to dual_norm_search.
double dual_norm_convex(const MinkowskiNorm& norm, const Vec& omega);

/// Tabulates the dual norm of a dim-2 norm on `resolution` circle angles.
MinkowskiNorm dual_table_norm(const MinkowskiNorm& norm, int resolution = 2048);

/// F(v+w)^2 + F(v-w)^2 - 2F(v)^2 - 2F(w)^2.
double parallelogram_defect(const MinkowskiNorm& norm, const Vec& v, const Vec& w);

nlohmann::json to_json(const MinkowskiNorm& norm);
MinkowskiNorm norm_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ConvexityReport& report);

}  // namespace finslerkit
