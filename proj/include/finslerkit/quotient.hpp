#pragma once

#include "finslerkit/minkowski.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace finslerkit {

/// A normed fiber V = (R^n, F) with a subspace K of the dual, given by the
/// columns of `kernel` (n x k, linearly independent, k <= n).
class QuotientInstance {
 public:
  QuotientInstance(MinkowskiNorm norm, Mat kernel);

  const MinkowskiNorm& norm() const { return norm_; }
  const Mat& kernel() const { return kernel_; }
  int dim() const { return norm_.dim(); }
  int kernel_dim() const { return static_cast<int>(kernel_.cols()); }

  /// Orthonormal basis of the annihilator K-perp in V (n x (n - k)).
  const Mat& annihilator() const { return annihilator_; }
  /// Euclidean projector of V* onto K along K-perp.
  Vec remove_kernel(const Vec& omega) const;

  double norm_of(const Vec& v) const;       // F
  double dual_norm_of(const Vec& omega) const;  // F*

 private:
  MinkowskiNorm norm_;
  Mat kernel_;
  Mat kernel_q_;  // orthonormal basis of K
  Mat annihilator_;
};

enum class QuotientSolver { trivial, newton, simplex, subgradient };
std::string to_string(QuotientSolver s);

/// The coset representative + K with its quotient norm and the solver's
/// certificate: `lift` lies in the coset with F*(lift) = class_norm, and
/// `dual_bound` = <representative, u> for some u in K-perp with F(u) <= 1.
struct QuotientElement {
  Vec representative;
  double class_norm = 0.0;
  Vec lift;
  double dual_bound = 0.0;
  double gap = 0.0;  // class_norm - dual_bound
  QuotientSolver solver = QuotientSolver::trivial;
  int iterations = 0;
};

struct QuotientOptions {
  double newton_tol = 1e-14;
  int newton_max_iter = 100;
  int subgradient_max_iter = 10000;
  /// Throw NumericError when the certified gap exceeds this.
  double gap_tol = 1e-8;
  /// Force the subgradient method regardless of the norm family.
  bool force_subgradient = false;
};

QuotientElement project_P(const QuotientInstance& inst, const Vec& omega, const QuotientOptions& options = {});
Vec minimal_lift(const QuotientInstance& inst, const QuotientElement& element);

struct VectorResult {
  Vec embedded;
  double abstract_norm = 0.0;  // sup{<omega, v> : class_norm(omega + K) <= 1}
  double concrete_norm = 0.0;  // F(v)
  Vec maximizer;               // omega attaining abstract_norm, class_norm(maximizer) = 1
  double gap = 0.0;            // certificate gap of the maximization
};

/// v must annihilate K to within 1e-10 (relative to |v|).
VectorResult iota_embed(const QuotientInstance& inst, const Vec& v, const QuotientOptions& options = {});

struct QuotientCase {
  std::string id;
  QuotientInstance instance;
  Vec covector;
  std::optional<Vec> vector;  // in K-perp; a random one is drawn if absent
};

/// Seeded random cases: dim 2..6, dim K <= min(3, n - 1), norms drawn from
/// euclidean (random Gram), weighted l1 and quartic_blend.
std::vector<QuotientCase> random_quotient_cases(int count, std::uint64_t seed);

struct QuotientRow {
  std::string id;
  std::string norm_family;
  QuotientSolver solver = QuotientSolver::trivial;
  double class_norm = 0.0;
  double lift_norm = 0.0;
  double abstract_norm = 0.0;
  double concrete_norm = 0.0;
  double gap = 0.0;  // max(class gap, |abstract - concrete|)
  double rep_norm = 0.0;
  double lift_residual = 0.0;  // distance of the lift from the coset
  bool contraction_ok = false;
  bool lift_ok = false;
  bool isometry_ok = false;
};

struct QuotientBatchOptions {
  QuotientOptions solver;
  double lift_tol = 1e-8;
  double isometry_tol = 1e-6;
  std::uint64_t seed = 0;  // for vectors drawn when a case has none
};

struct QuotientBatchReport {
  std::vector<QuotientRow> rows;
  double max_gap = 0.0;
  double max_lift_error = 0.0;
  double max_isometry_error = 0.0;
  bool passed = false;
};

QuotientBatchReport run_quotient_batch(const std::vector<QuotientCase>& cases, const QuotientBatchOptions& options = {});

/// id,class_norm,lift_norm,abstract_norm,concrete_norm,gap
void write_quotient_csv(std::ostream& out, const QuotientBatchReport& report);
nlohmann::json to_json(const QuotientBatchReport& report);

nlohmann::json to_json(const QuotientInstance& inst);
QuotientInstance quotient_instance_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const QuotientCase& c);
QuotientCase quotient_case_from_json(const nlohmann::json& doc);
/// Either {"cases": [...]} or {"random": {"count": N, "seed": s}} (or both).
std::vector<QuotientCase> quotient_cases_from_json(const nlohmann::json& doc);

}  // namespace finslerkit
