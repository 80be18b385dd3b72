#pragma once

#include "finslerkit/common.hpp"
#include "finslerkit/manifold.hpp"
#include "finslerkit/minkowski.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

namespace finslerkit {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct Atom {
  Vec point;
  double mass = 0.0;
};

/// How sample weights are produced: a density (normalized to `mass`) times
/// the equal local area estimate, plus point atoms snapped to the nearest
/// sample. An atoms-only measure with exactly n atoms uses the atom
/// locations as the sample points.
struct MeasureSpec {
  enum class Density { none, uniform, smooth };
  Density density = Density::uniform;
  double amplitude = 0.5;  // smooth density is proportional to 1 + amplitude * s(x), |s| <= 1
  double mass = 1.0;
  std::vector<Atom> atoms;
};

struct WeightedMeasure {
  std::vector<double> weights;
  double total_mass = 0.0;
};

struct Edge {
  int to = 0;
  double length = 0.0;
};

/// Point samples of a manifold with a symmetric k-nearest-neighbor graph
/// whose edge lengths are Finsler lengths of chart segments.
class SampledManifold {
 public:
  SampledManifold(ManifoldSpec spec, std::vector<Vec> points, std::vector<std::vector<Edge>> adjacency,
                  WeightedMeasure measure);

  const ManifoldSpec& spec() const { return spec_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec>& points() const { return points_; }
  const Vec& point(int i) const { return points_[i]; }
  const std::vector<Edge>& neighbors(int i) const { return adjacency_[i]; }
  const WeightedMeasure& measure() const { return measure_; }
  std::size_t edge_count() const;
  double median_edge_length() const;
  bool connected() const;

  /// Same points and graph, different weights.
  SampledManifold with_measure(WeightedMeasure measure) const;

 private:
  ManifoldSpec spec_;
  std::vector<Vec> points_;
  std::vector<std::vector<Edge>> adjacency_;
  WeightedMeasure measure_;
};

/// ManifoldSpec::coordinate_distance on raw coordinate arrays (squared),
/// for brute-force neighbor scans.
class CoordinateMetric {
 public:
  explicit CoordinateMetric(const ManifoldSpec& spec);
  double squared(const double* a, const double* b) const;
  int dim() const { return dim_; }
  /// Row-major copy of the points.
  static std::vector<double> flatten(const std::vector<Vec>& points, int dim);

 private:
  int dim_;
  bool torus_;
  double g00_ = 1, g01_ = 0, g11_ = 1, p0_ = 1, p1_ = 1;
};

/// Quasi-random samples per manifold kind (Halton boxes and tori, a
/// Fibonacci lattice on the sphere), each with a seeded random shift.
std::vector<Vec> sample_points(const ManifoldSpec& spec, int n, std::uint64_t seed);

/// Merges duplicate points (weights summed), links k nearest neighbors in
/// chart coordinates and checks connectivity.
SampledManifold build_graph(const ManifoldSpec& spec, std::vector<Vec> points, std::vector<double> weights,
                            int k = 12);
SampledManifold sample_manifold(const ManifoldSpec& spec, int n, const MeasureSpec& measure, std::uint64_t seed,
                                int k = 12);
WeightedMeasure make_measure(const ManifoldSpec& spec, const std::vector<Vec>& points, const MeasureSpec& measure);

/// Reusable single-source shortest path state; a search only touches the
/// vertices it reaches, so truncated searches stay local.
class DijkstraWorkspace {
 public:
  explicit DijkstraWorkspace(const SampledManifold& graph);
  /// Distances from `source`, settled up to `cutoff`. Returns the reached
  /// vertices in order of distance.
  const std::vector<int>& run(int source, double cutoff = kUnreachable);
  double distance(int v) const { return dist_[v]; }

 private:
  const SampledManifold* graph_;
  std::vector<double> dist_;
  std::vector<int> reached_;
};

/// |sources| x |targets| matrix of graph distances (kUnreachable when no
/// path exists).
Mat graph_distance(const SampledManifold& graph, const std::vector<int>& sources, const std::vector<int>& targets);
void write_distance_csv(std::ostream& out, const Mat& distances, const std::vector<int>& sources,
                        const std::vector<int>& targets);

/// Indices within graph distance r of x, x included.
std::vector<int> graph_ball(const SampledManifold& graph, int x, double r);

/// Values of a function on the samples, optionally with the analytic
/// function they were taken from.
class ScalarField {
 public:
  using Function = std::function<double(const Vec&)>;

  ScalarField() = default;
  explicit ScalarField(std::vector<double> values, std::string name = {});
  static ScalarField from_function(const SampledManifold& graph, Function fn, std::string name = {});

  const std::vector<double>& values() const { return values_; }
  double operator[](int i) const { return values_[i]; }
  int size() const { return static_cast<int>(values_.size()); }
  bool has_closed_form() const { return static_cast<bool>(closed_form_); }
  const std::shared_ptr<const Function>& closed_form() const { return closed_form_; }
  /// The analytic function; throws InputError when absent.
  double evaluate(const Vec& x) const;
  const std::string& name() const { return name_; }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double c, const ScalarField& a);

 private:
  std::vector<double> values_;
  std::shared_ptr<const Function> closed_form_;
  std::string name_;
};

/// max over pairs of |f(x) - f(y)| / d(x, y). When `subset` is every vertex
/// this equals the maximum edge difference quotient, which is used instead
/// of the pairwise sweep.
double lip_global(const ScalarField& f, const SampledManifold& graph, const std::vector<int>& subset);
double lip_global(const ScalarField& f, const SampledManifold& graph);
/// Lipschitz constant of f on the graph ball of radius r around x.
double lip_a_est(const ScalarField& f, const SampledManifold& graph, int x, double r);
/// lip_a_est at every vertex, from one table of truncated searches of
/// radius 2r; equal to calling lip_a_est per vertex.
std::vector<double> lip_a_all(const ScalarField& f, const SampledManifold& graph, double r);
/// max difference quotient over edges with both ends in `members`; a lower
/// bound of the pairwise constant on that set.
double edge_lipschitz(const ScalarField& f, const SampledManifold& graph, const std::vector<int>& members);

/// v -> min_j (value_j + L * norm(v - x_j)).
class McShaneExtension {
 public:
  McShaneExtension(std::vector<Vec> points, std::vector<double> values, double lipschitz, MinkowskiNorm norm);
  double operator()(const Vec& v) const;
  double lipschitz() const { return lipschitz_; }
  const MinkowskiNorm& norm() const { return norm_; }
  const std::vector<Vec>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<Vec> points_;
  std::vector<double> values_;
  double lipschitz_;
  MinkowskiNorm norm_;
};

/// Validates that the values are L-Lipschitz for `norm` (relative slack
/// 1e-12) and returns the extension; a violating pair raises
/// PreconditionError naming the pair.
McShaneExtension mcshane_extend(const std::vector<std::pair<Vec, double>>& values, double lipschitz,
                                const MinkowskiNorm& norm);

nlohmann::json to_json(const SampledManifold& graph);
SampledManifold sampled_manifold_from_json(const nlohmann::json& doc);

}  // namespace finslerkit
