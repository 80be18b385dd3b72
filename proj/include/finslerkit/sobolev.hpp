#pragma once

#include "finslerkit/metric_graph.hpp"
#include "finslerkit/smoothing.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace finslerkit {

/// F(x, .) in the coordinates of the tangent frame I_x (Euclidean on the
/// Riemannian kinds, whose frames are orthonormal).
MinkowskiNorm fiber_norm(const ManifoldSpec& spec, const Vec& x);

/// Central-difference gradient of g o exp_x o I_x at 0 with step
/// grid_step/2. Throws NumericError when a stencil point leaves the cover.
Vec pointwise_differential(const SmoothedFunction& g, const SampledManifold& graph, int x);
/// Same for a closed-form function, with an explicit step.
Vec pointwise_differential(const ScalarField::Function& fn, const SampledManifold& graph, int x, double step = 1e-5);

struct CovectorField {
  std::vector<Vec> covectors;  // in the frame I_x
  std::vector<double> norms;   // F*(x, .)
};

struct VectorField {
  std::vector<Vec> vectors;  // in the frame I_x
  std::vector<double> norms;  // F(x, .)
};

CovectorField differential_field(const SmoothedFunction& g, const SampledManifold& graph);
CovectorField make_covector_field(const SampledManifold& graph, std::vector<Vec> covectors);
VectorField make_vector_field(const SampledManifold& graph, std::vector<Vec> vectors);
/// omega(v) at every sample.
std::vector<double> pairing(const CovectorField& omega, const VectorField& v);

/// Shared covers of a (eps_j, lambda_j) = (eps/2^j, lambda/2^j) ladder.
/// Fields are normalized to unit global Lipschitz constant before
/// smoothing, so one cover per rung serves every field.
struct WugLadder {
  double delta = 0.0;
  std::vector<double> eps;
  std::vector<double> lambda;
  std::vector<std::shared_ptr<const PartitionOfUnity>> partitions;

  int rungs() const { return static_cast<int>(eps.size()); }
  /// Largest cover parameter r over the rungs.
  double max_r() const;
};

WugLadder build_wug_ladder(const SampledManifold& graph, double delta, double eps, double lambda, std::uint64_t seed,
                           int rungs = 3);

struct WugResult {
  std::vector<double> values;                 // per-sample minimum over the rungs
  std::vector<std::vector<double>> per_rung;  // |dg_j|(x)
  double lipschitz_scale = 0.0;               // lip_global(f) used for normalization
};

WugResult wug_estimate(const ScalarField& f, const SampledManifold& graph, const WugLadder& ladder);
WugResult wug_estimate(const ScalarField& f, const SampledManifold& graph, double delta, double eps, double lambda,
                       std::uint64_t seed, int rungs = 3);

enum class HilbertVerdict { hilbertian_within_tol, non_hilbertian, inconclusive };
std::string to_string(HilbertVerdict v);

struct HilbertParams {
  double delta = 0.4;
  double eps = 0.05;
  double lambda = 0.2;
  int rungs = 3;
  std::uint64_t seed = 1;
  double tol_h = 0.02;
  double tol_nh = 0.10;
  double sign_fraction = 0.9;
  double mass_fraction = 0.99;  // degenerate-mass rule: samples needed to carry this share
  int min_support = 32;
  double sandwich_fraction = 0.99;
  /// eps and lambda are multiples of the median edge length, so a finer
  /// graph also refines the smoothing scales.
  bool mesh_relative = false;

  double eps_for(const SampledManifold& graph) const;
  double lambda_for(const SampledManifold& graph) const;
};

struct HilbertianityReport {
  std::vector<double> weights;
  std::vector<double> w_f, w_g, w_sum, w_diff;
  std::vector<double> defect;
  double integrated_abs = 0.0;
  double integrated_signed = 0.0;
  double reference = 0.0;  // integral of 2 W(f)^2 + 2 W(g)^2
  double relative = 0.0;
  double consistent_sign_mass = 0.0;
  int support_count = 0;
  HilbertVerdict verdict = HilbertVerdict::inconclusive;
  HilbertParams params;
  bool riemannian = false;
  double eps_chart = 0.0;
  double sandwich_factor = 0.0;  // (1 + eps_chart)^4 - 1
  double sandwich_ok_fraction = 1.0;
  bool sandwich_pass = true;
};

/// Verdict and sandwich audit from precomputed upper-gradient surrogates.
HilbertianityReport hilbertianity_from_wug(const WeightedMeasure& mu, const std::vector<double>& w_f,
                                           const std::vector<double>& w_g, const std::vector<double>& w_sum,
                                           const std::vector<double>& w_diff, bool riemannian, double eps_chart,
                                           const HilbertParams& params);

HilbertianityReport hilbertianity_check(const SampledManifold& graph, const WeightedMeasure& mu, const ScalarField& f,
                                        const ScalarField& g, const HilbertParams& params = {});

/// index,weight,W_f,W_g,W_sum,W_diff,defect
void write_hilbert_csv(std::ostream& out, const HilbertianityReport& report);
nlohmann::json to_json(const HilbertianityReport& report);

}  // namespace finslerkit
