#pragma once

#include "finslerkit/manifold.hpp"
#include "finslerkit/metric_graph.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace finslerkit {

struct CoverOptions {
  int overlap_cap = 16;
  int radius_budget = 48;  // sampled pairs per biLipschitz radius test
};

/// Finite chart cover B_i of the sample set.
struct CoverData {
  std::vector<ChartData> charts;
  std::vector<int> centers;                     // sample index of each chart center
  std::vector<std::vector<int>> adjacency;      // A_i: charts whose ball meets B_i (i included), sorted
  std::vector<int> n;                           // n_i = |A_i|
  std::vector<int> m;                           // m_i = max_{j in A_i} n_j
  std::vector<std::vector<int>> members;        // samples inside each chart ball
  std::vector<std::vector<int>> sample_charts;  // charts containing each sample
  double r = 0.0;
  double lip_f = 0.0;
  double delta = 0.0;
  double lambda = 0.0;

  int size() const { return static_cast<int>(charts.size()); }
};

/// Largest r = (delta/2) 2^{-j/8} with (2r + r^2) lip_f + r <= lambda.
double admissible_radius(double lip_f, double delta, double lambda);

CoverData build_cover(const SampledManifold& graph, double lip_f, double delta, double lambda, std::uint64_t seed,
                      const CoverOptions& options = {});
CoverData build_cover(const SampledManifold& graph, const ScalarField& f, double delta, double lambda,
                      std::uint64_t seed, const CoverOptions& options = {});

/// exp(1 - 1/(1 - t^2)) for |t| < 1, 0 otherwise.
double bump(double t);

/// psi_i = b(||phi_i(x)||_i / rho_i) / sum_j b(...).
class PartitionOfUnity {
 public:
  using Weights = std::vector<std::pair<int, double>>;

  PartitionOfUnity(ManifoldSpec spec, std::shared_ptr<const CoverData> cover);

  /// Normalized weights of the active charts among `candidates` at x.
  /// Throws ConstructionError when no candidate bump is positive.
  void weights(const Vec& x, const std::vector<int>& candidates, Weights& out) const;
  /// Charts that can be active at points close to sample s.
  const std::vector<int>& candidates_near_sample(int s) const { return near_sample_[s]; }
  /// All charts whose ball may contain x.
  std::vector<int> candidates(const Vec& x) const;
  double psi(int chart, const Vec& x) const;
  /// Raw bump value of a chart at x.
  double raw_bump(int chart, const Vec& x) const;

  const Weights& at_sample(int s) const { return at_samples_[s]; }
  const std::vector<double>& lipschitz() const { return lipschitz_; }
  const CoverData& cover() const { return *cover_; }
  const ManifoldSpec& spec() const { return spec_; }

 private:
  friend PartitionOfUnity build_partition(std::shared_ptr<const CoverData> cover, const SampledManifold& graph);
  ManifoldSpec spec_;
  std::shared_ptr<const CoverData> cover_;
  std::vector<std::vector<int>> near_sample_;
  std::vector<Weights> at_samples_;
  std::vector<double> lipschitz_;
};

/// Sample weights, Lip(psi_i) by difference quotients on a chart probe grid.
PartitionOfUnity build_partition(std::shared_ptr<const CoverData> cover, const SampledManifold& graph);

using ChartFunction = std::function<double(const Vec&)>;

/// Unnormalized mollifier profile exp(-1/(1 - s^2)) on |s| < 1.
double mollifier_profile(double s);

/// f * rho_k on the lattice h Z^n (Euclidean kernel radius 1/k, discrete
/// unit mass), evaluated off-lattice by tensor Catmull-Rom interpolation.
/// Lattice values are computed on demand and memoized; copies share the
/// cache. Not thread-safe.
class MollifiedFunction {
 public:
  MollifiedFunction(ChartFunction f, int dim, int k, double grid_step);
  double operator()(const Vec& v) const;
  /// Convolution value at the lattice node h z.
  double node_value(const std::vector<long long>& z) const;
  int k() const;
  double grid_step() const;
  int dim() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Throws InputError unless grid_step <= 1/(4k).
MollifiedFunction mollify(ChartFunction f, int dim, int k, double grid_step);

struct ChartPlan {
  double lip_ball = 0.0;  // Lip(f; B_i)
  double extension_lipschitz = 0.0;  // L_i = (1+r) Lip(f; B_i)
  int k = 1;
  double grid_step = 0.25;
  bool constant = false;  // f constant on the chart: g_i = f_i without mollification
  double constant_value = 0.0;
};

struct SmoothingPlan {
  std::vector<ChartPlan> charts;
  std::string kernel = "exp_bump";
  double delta = 0.0;
  double eps = 0.0;
  double lambda = 0.0;
};

/// g = sum_i psi_i (g_i o phi_i). Keeps a pointer to the graph, which must
/// outlive it.
class SmoothedFunction {
 public:
  SmoothedFunction(const SampledManifold& graph, std::shared_ptr<const PartitionOfUnity> partition,
                   SmoothingPlan plan, std::vector<ChartFunction> extensions, std::vector<MollifiedFunction> mollified);

  double at_sample(int s) const;
  /// g at a point near sample s (within the charts active around s).
  double near_sample(int s, const Vec& x) const;
  /// g at an arbitrary manifold point.
  double operator()(const Vec& x) const;
  /// g_i(u) in chart coordinates.
  double chart_value(int chart, const Vec& u) const;
  /// f_i(u), the chart extension before mollification.
  double extension_value(int chart, const Vec& u) const;
  /// Smallest lattice step over the charts active at sample s.
  double grid_step_near(int s) const;
  ScalarField sample_values() const;

  const SampledManifold& graph() const { return *graph_; }
  const PartitionOfUnity& partition() const { return *partition_; }
  const CoverData& cover() const { return partition_->cover(); }
  const SmoothingPlan& plan() const { return plan_; }

 private:
  double assemble(const Vec& x, const PartitionOfUnity::Weights& w) const;
  const SampledManifold* graph_;
  std::shared_ptr<const PartitionOfUnity> partition_;
  SmoothingPlan plan_;
  std::vector<ChartFunction> extensions_;
  std::vector<MollifiedFunction> mollified_;
};

/// Extension, scale selection and mollification on a given cover.
SmoothedFunction smooth_on_cover(const SampledManifold& graph, const ScalarField& f,
                                 std::shared_ptr<const PartitionOfUnity> partition, double eps, double lambda);

struct SampleAudit {
  double err_abs = 0.0;
  double lipa_g = 0.0;
  double lipf_ball = 0.0;
  double s_x = 0.0;
  bool err_ok = true;
  bool lip_ok = true;
  bool resolved = true;  // Lip(f; B_{delta + r_audit}(x)) <= Lip(f; B_delta(x)) + slack * lambda
  bool support_ok = true;
};

struct SmoothingReport {
  std::vector<SampleAudit> rows;
  double delta = 0.0, eps = 0.0, lambda = 0.0;
  double r = 0.0;
  double lip_f = 0.0;
  double r_audit = 0.0;
  double lambda_slack = 0.1;
  double lip_fraction_required = 0.99;
  int charts = 0;
  int max_k = 0;
  int max_overlap = 0;
  double sup_err = 0.0;
  int resolvable = 0;
  int sub_resolution = 0;  // samples whose s_x is below the median edge length
  int lip_ok_count = 0;
  double lip_ok_fraction = 1.0;
  bool err_pass = true;
  bool lip_pass = true;
  bool support_pass = true;
  bool passed = true;
  std::vector<std::string> failures;  // witnessing samples
};

struct SmoothingOptions {
  CoverOptions cover;
  bool audit = true;
  double lambda_slack = 0.1;
  double lip_fraction = 0.99;
  double audit_scale = 4.0;  // r_audit = audit_scale * median edge length
};

struct SmoothingResult {
  SmoothedFunction g;
  ScalarField values;
  SmoothingReport report;
};

SmoothingResult smooth_approximate(const SampledManifold& graph, const ScalarField& f, double delta, double eps,
                                   double lambda, std::uint64_t seed, const SmoothingOptions& options = {});

SmoothingReport audit_smoothing(const SampledManifold& graph, const ScalarField& f, const SmoothedFunction& g,
                                const ScalarField& g_values, double delta, double eps, double lambda,
                                const SmoothingOptions& options = {});

/// Per-sample rows index,err_abs,lipa_g,lipf_ball,bound_ok,support_ok;
/// bound_ok is "unresolved" where Lip(f; B_delta(x)) is not stable at the
/// audit scale (see SampleAudit::resolved).
void write_smoothing_csv(std::ostream& out, const SmoothingReport& report);
/// Plan parameters and summary, the header block of the report.
nlohmann::json to_json(const SmoothingReport& report);

}  // namespace finslerkit
