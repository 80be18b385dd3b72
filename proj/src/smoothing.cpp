#include "finslerkit/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <unordered_map>

namespace finslerkit {

namespace {

// Bound kappa with coordinate_distance(c, x) <= kappa * ||phi(x)||_chart.
double coordinate_reach(const ManifoldSpec& spec, const ChartData& chart) {
  if (spec.kind() == ManifoldKind::sphere2 || spec.kind() == ManifoldKind::flat_torus2) return 1.0;
  Eigen::JacobiSVD<Mat> svd(chart.frame);
  return svd.singularValues()[0] * chart.equiv_constant;
}

int probe_count(int dim) {
  switch (dim) {
    case 1: return 201;
    case 2: return 21;
    default: return 9;
  }
}

// Regular probe grid on [-rho, rho]^dim in chart coordinates.
struct ProbeGrid {
  int per_axis = 0;
  int dim = 0;
  double step = 0.0;
  std::vector<Vec> points;

  ProbeGrid(int dim_, double rho) : per_axis(probe_count(dim_)), dim(dim_), step(2.0 * rho / (per_axis - 1)) {
    int total = 1;
    for (int a = 0; a < dim; ++a) total *= per_axis;
    points.reserve(total);
    for (int idx = 0; idx < total; ++idx) {
      Vec u(dim);
      int rest = idx;
      for (int a = 0; a < dim; ++a) {
        u[a] = -rho + step * (rest % per_axis);
        rest /= per_axis;
      }
      points.push_back(u);
    }
  }

  // Index of the neighbor one step along axis a, or -1.
  int forward(int idx, int a) const {
    int stride = 1;
    for (int b = 0; b < a; ++b) stride *= per_axis;
    if ((idx / stride) % per_axis == per_axis - 1) return -1;
    return idx + stride;
  }
};

std::vector<Vec> boundary_ring(const MinkowskiNorm& norm, double rho) {
  const int dim = norm.dim();
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Ones(1));
    dirs.push_back(-Vec::Ones(1));
  } else if (dim == 2) {
    constexpr int kCount = 64;
    for (int j = 0; j < kCount; ++j) {
      const double a = 2.0 * std::numbers::pi * j / kCount;
      Vec d(2);
      d << std::cos(a), std::sin(a);
      dirs.push_back(d);
    }
  } else {
    constexpr int kCount = 128;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < kCount; ++j) {
      const double z = 1.0 - 2.0 * (j + 0.5) / kCount;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec d = Vec::Zero(dim);
      d[0] = rad * std::cos(golden * j);
      d[1] = rad * std::sin(golden * j);
      d[2] = z;
      dirs.push_back(d);
    }
  }
  for (auto& d : dirs) d *= rho * (1.0 - 1e-12) / norm(d);
  return dirs;
}

}  // namespace

double admissible_radius(double lip_f, double delta, double lambda) {
  if (!std::isfinite(lip_f) || lip_f < 0.0) throw InputError("build_cover: Lip(f) must be finite and >= 0");
  if (!(delta > 0.0) || !(lambda > 0.0)) throw InputError("build_cover: delta and lambda must be positive");
  for (int j = 0; j <= 8 * 80; ++j) {
    const double r = 0.5 * delta * std::exp2(-j / 8.0);
    if ((2.0 * r + r * r) * lip_f + r <= lambda) return r;
  }
  throw InputError("build_cover: no admissible cover parameter r for the given lambda");
}

CoverData build_cover(const SampledManifold& graph, const ScalarField& f, double delta, double lambda,
                      std::uint64_t seed, const CoverOptions& options) {
  if (f.size() != graph.size()) throw InputError("build_cover: field size does not match the graph");
  return build_cover(graph, lip_global(f, graph), delta, lambda, seed, options);
}

CoverData build_cover(const SampledManifold& graph, double lip_f, double delta, double lambda, std::uint64_t seed,
                      const CoverOptions& options) {
  const ManifoldSpec& spec = graph.spec();
  CoverData cover;
  cover.r = admissible_radius(lip_f, delta, lambda);
  cover.lip_f = lip_f;
  cover.delta = delta;
  cover.lambda = lambda;
  const double r = cover.r;
  const int n = graph.size();

  const CoordinateMetric metric(spec);
  const int adim = metric.dim();
  const std::vector<double> flat = CoordinateMetric::flatten(graph.points(), adim);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // A sample counts as covered once it lies in the core t < kCore of a chart,
  // which keeps its bump value away from underflow.
  constexpr double kCore = 0.8;
  std::vector<char> covered(n, 0);
  cover.sample_charts.assign(n, {});
  std::vector<double> reach;
  for (int s : order) {
    if (covered[s]) continue;
    const int id = cover.size();
    const Vec& c = graph.point(s);
    double rho = 0.95 * r / (1.0 + r);
    try {
      const auto dh = bilipschitz_radius(spec, c, r, options.radius_budget,
                                         seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(id));
      rho = std::min(rho, dh.radius);
    } catch (const SearchFailure& e) {
      throw ConstructionError(std::string("build_cover: ") + e.what());
    }
    ChartData chart = make_chart(spec, c, rho, 1.0 + r);
    const double kappa = coordinate_reach(spec, chart);
    const double bound2 = std::pow(kappa * rho * (1.0 + 1e-9) + 1e-15, 2);
    std::vector<int> members;
    const double* pc = &flat[static_cast<std::size_t>(s) * adim];
    for (int t = 0; t < n; ++t) {
      if (metric.squared(pc, &flat[static_cast<std::size_t>(t) * adim]) > bound2) continue;
      const double tt = chart.chart_norm(to_chart(spec, chart, graph.point(t))) / rho;
      if (tt < 1.0) {
        members.push_back(t);
        cover.sample_charts[t].push_back(id);
        if (static_cast<int>(cover.sample_charts[t].size()) > options.overlap_cap) {
          throw ConstructionError("build_cover: sample " + std::to_string(t) + " lies in more than " +
                                  std::to_string(options.overlap_cap) + " charts");
        }
        if (tt < kCore) covered[t] = 1;
      }
    }
    if (!covered[s]) throw ConstructionError("build_cover: chart center not covered");
    cover.charts.push_back(std::move(chart));
    cover.centers.push_back(s);
    cover.members.push_back(std::move(members));
    reach.push_back(kappa * rho);
  }
  for (int t = 0; t < n; ++t) {
    if (cover.sample_charts[t].empty()) throw ConstructionError("build_cover: sample " + std::to_string(t) + " uncovered");
  }

  const int m = cover.size();
  cover.adjacency.assign(m, {});
  for (int i = 0; i < m; ++i) {
    cover.adjacency[i].push_back(i);
    const double* pi = &flat[static_cast<std::size_t>(cover.centers[i]) * adim];
    for (int j = i + 1; j < m; ++j) {
      const double lim = reach[i] + reach[j];
      if (metric.squared(pi, &flat[static_cast<std::size_t>(cover.centers[j]) * adim]) >= lim * lim) continue;
      const double d = spec.distance(cover.charts[i].center, cover.charts[j].center);
      if (d < (1.0 + r) * (cover.charts[i].radius + cover.charts[j].radius)) {
        cover.adjacency[i].push_back(j);
        cover.adjacency[j].push_back(i);
      }
    }
  }
  cover.n.resize(m);
  cover.m.resize(m);
  for (int i = 0; i < m; ++i) {
    std::sort(cover.adjacency[i].begin(), cover.adjacency[i].end());
    cover.n[i] = static_cast<int>(cover.adjacency[i].size());
  }
  for (int i = 0; i < m; ++i) {
    int best = 0;
    for (int j : cover.adjacency[i]) best = std::max(best, cover.n[j]);
    cover.m[i] = best;
  }
  return cover;
}

double bump(double t) {
  const double t2 = t * t;
  if (!(t2 < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

PartitionOfUnity::PartitionOfUnity(ManifoldSpec spec, std::shared_ptr<const CoverData> cover)
    : spec_(std::move(spec)), cover_(std::move(cover)) {}

double PartitionOfUnity::raw_bump(int chart, const Vec& x) const {
  const ChartData& c = cover_->charts[chart];
  return bump(c.chart_norm(to_chart(spec_, c, x)) / c.radius);
}

void PartitionOfUnity::weights(const Vec& x, const std::vector<int>& candidates, Weights& out) const {
  out.clear();
  double sum = 0.0;
  for (int j : candidates) {
    const double b = raw_bump(j, x);
    if (b > 0.0) {
      out.emplace_back(j, b);
      sum += b;
    }
  }
  if (!(sum > 0.0)) throw ConstructionError("partition of unity: no active chart at a point (coverage hole)");
  for (auto& [j, w] : out) w /= sum;
}

std::vector<int> PartitionOfUnity::candidates(const Vec& x) const {
  std::vector<int> out;
  for (int j = 0; j < cover_->size(); ++j) {
    if (raw_bump(j, x) > 0.0) out.push_back(j);
  }
  return out;
}

double PartitionOfUnity::psi(int chart, const Vec& x) const {
  if (raw_bump(chart, x) <= 0.0) return 0.0;
  Weights w;
  weights(x, cover_->adjacency[chart], w);
  for (const auto& [j, v] : w)
    if (j == chart) return v;
  return 0.0;
}

PartitionOfUnity build_partition(std::shared_ptr<const CoverData> cover, const SampledManifold& graph) {
  if (!cover || cover->size() == 0) throw ConstructionError("build_partition: empty cover");
  if (static_cast<int>(cover->sample_charts.size()) != graph.size()) {
    throw InputError("build_partition: cover was built for a different graph");
  }
  PartitionOfUnity pu(graph.spec(), cover);
  const int n = graph.size();
  pu.near_sample_.resize(n);
  pu.at_samples_.resize(n);
  for (int s = 0; s < n; ++s) {
    std::vector<int>& near = pu.near_sample_[s];
    for (int i : cover->sample_charts[s]) near.insert(near.end(), cover->adjacency[i].begin(), cover->adjacency[i].end());
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    try {
      pu.weights(graph.point(s), cover->sample_charts[s], pu.at_samples_[s]);
    } catch (const ConstructionError&) {
      throw ConstructionError("build_partition: bump sum vanishes at sample " + std::to_string(s));
    }
  }

  const ManifoldSpec& spec = graph.spec();
  const double bilip = 1.0 + cover->r;
  pu.lipschitz_.assign(cover->size(), 0.0);
  PartitionOfUnity::Weights w;
  for (int i = 0; i < cover->size(); ++i) {
    const ChartData& chart = cover->charts[i];
    const ProbeGrid grid(spec.intrinsic_dim(), chart.radius);
    std::vector<double> psi(grid.points.size(), 0.0);
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      if (!(chart.chart_norm(grid.points[p]) < chart.radius)) continue;
      const Vec x = from_chart(spec, chart, grid.points[p]);
      if (pu.raw_bump(i, x) <= 0.0) continue;
      pu.weights(x, cover->adjacency[i], w);
      for (const auto& [j, v] : w)
        if (j == i) psi[p] = v;
    }
    double lip = 0.0;
    for (int p = 0; p < static_cast<int>(grid.points.size()); ++p) {
      for (int a = 0; a < grid.dim; ++a) {
        const int q = grid.forward(p, a);
        if (q < 0 || (psi[p] == 0.0 && psi[q] == 0.0)) continue;
        const double du = chart.chart_norm(grid.points[q] - grid.points[p]);
        lip = std::max(lip, std::abs(psi[q] - psi[p]) * bilip / du);
      }
    }
    pu.lipschitz_[i] = lip;
  }
  return pu;
}

double mollifier_profile(double s) {
  const double s2 = s * s;
  if (!(s2 < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - s2));
}

struct MollifiedFunction::State {
  ChartFunction f;
  int dim = 2;
  int k = 1;
  double h = 0.25;
  std::vector<std::vector<int>> offsets;
  std::vector<double> weights;
  std::unordered_map<std::uint64_t, double> f_cache;
  std::unordered_map<std::uint64_t, double> node_cache;

  static constexpr long long kRange = 1LL << 20;
  static constexpr std::size_t kCacheLimit = 200000;

  std::uint64_t key(const long long* z) const {
    std::uint64_t out = 0;
    for (int a = 0; a < dim; ++a) {
      if (z[a] <= -kRange || z[a] >= kRange) throw NumericError("mollify: lattice index out of range");
      out = (out << 21) | static_cast<std::uint64_t>(z[a] + kRange);
    }
    return out;
  }

  double f_at(const long long* z) {
    const std::uint64_t kk = key(z);
    auto it = f_cache.find(kk);
    if (it != f_cache.end()) return it->second;
    Vec v(dim);
    for (int a = 0; a < dim; ++a) v[a] = h * static_cast<double>(z[a]);
    const double value = f(v);
    if (f_cache.size() >= kCacheLimit) f_cache.clear();
    f_cache.emplace(kk, value);
    return value;
  }

  double node(const long long* z) {
    const std::uint64_t kk = key(z);
    auto it = node_cache.find(kk);
    if (it != node_cache.end()) return it->second;
    long long y[3];
    double acc = 0.0;
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      for (int a = 0; a < dim; ++a) y[a] = z[a] + offsets[o][a];
      acc += weights[o] * f_at(y);
    }
    if (node_cache.size() >= kCacheLimit) node_cache.clear();
    node_cache.emplace(kk, acc);
    return acc;
  }
};

MollifiedFunction::MollifiedFunction(ChartFunction f, int dim, int k, double grid_step)
    : state_(std::make_shared<State>()) {
  if (dim < 1 || dim > 3) throw InputError("mollify: chart dimension must be 1, 2 or 3");
  if (k < 1) throw InputError("mollify: k must be a positive integer");
  if (!(grid_step > 0.0)) throw InputError("mollify: grid_step must be positive");
  if (grid_step > 1.0 / (4.0 * k) * (1.0 + 1e-12)) {
    throw InputError("mollify: grid_step " + std::to_string(grid_step) + " is coarser than 1/(4k) = " +
                     std::to_string(1.0 / (4.0 * k)));
  }
  State& s = *state_;
  s.f = std::move(f);
  s.dim = dim;
  s.k = k;
  s.h = grid_step;
  const int reach = static_cast<int>(std::ceil(1.0 / (k * grid_step)));
  double mass = 0.0;
  std::vector<int> m(dim, -reach);
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += static_cast<double>(m[a]) * m[a];
    const double w = mollifier_profile(std::sqrt(r2) * grid_step * k);
    if (w > 0.0) {
      s.offsets.push_back(m);
      s.weights.push_back(w);
      mass += w;
    }
    int a = 0;
    while (a < dim && ++m[a] > reach) m[a++] = -reach;
    if (a == dim) break;
  }
  for (auto& w : s.weights) w /= mass;
}

MollifiedFunction mollify(ChartFunction f, int dim, int k, double grid_step) {
  return MollifiedFunction(std::move(f), dim, k, grid_step);
}

int MollifiedFunction::k() const { return state_->k; }
double MollifiedFunction::grid_step() const { return state_->h; }
int MollifiedFunction::dim() const { return state_->dim; }

double MollifiedFunction::node_value(const std::vector<long long>& z) const {
  if (static_cast<int>(z.size()) != state_->dim) throw InputError("mollify: node index has wrong dimension");
  return state_->node(z.data());
}

double MollifiedFunction::operator()(const Vec& v) const {
  State& s = *state_;
  if (v.size() != s.dim) throw InputError("mollify: point has wrong dimension");
  long long base[3];
  double w[3][4];
  for (int a = 0; a < s.dim; ++a) {
    const double x = v[a] / s.h;
    const double fl = std::floor(x);
    base[a] = static_cast<long long>(fl) - 1;
    const double t = x - fl, t2 = t * t, t3 = t2 * t;
    w[a][0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[a][1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[a][2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[a][3] = 0.5 * (t3 - t2);
  }
  int total = 1;
  for (int a = 0; a < s.dim; ++a) total *= 4;
  double acc = 0.0;
  long long z[3];
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    double weight = 1.0;
    for (int a = 0; a < s.dim; ++a) {
      const int o = rest % 4;
      rest /= 4;
      z[a] = base[a] + o;
      weight *= w[a][o];
    }
    if (weight != 0.0) acc += weight * s.node(z);
  }
  return acc;
}

SmoothedFunction::SmoothedFunction(const SampledManifold& graph, std::shared_ptr<const PartitionOfUnity> partition,
                                   SmoothingPlan plan, std::vector<ChartFunction> extensions,
                                   std::vector<MollifiedFunction> mollified)
    : graph_(&graph),
      partition_(std::move(partition)),
      plan_(std::move(plan)),
      extensions_(std::move(extensions)),
      mollified_(std::move(mollified)) {}

double SmoothedFunction::chart_value(int chart, const Vec& u) const {
  const ChartPlan& p = plan_.charts[chart];
  if (p.constant) return p.constant_value;
  return mollified_[chart](u);
}

double SmoothedFunction::extension_value(int chart, const Vec& u) const {
  const ChartPlan& p = plan_.charts[chart];
  if (p.constant) return p.constant_value;
  return extensions_[chart](u);
}

double SmoothedFunction::assemble(const Vec& x, const PartitionOfUnity::Weights& w) const {
  const ManifoldSpec& spec = graph_->spec();
  double acc = 0.0;
  for (const auto& [i, psi] : w) {
    const ChartPlan& p = plan_.charts[i];
    const double gi = p.constant ? p.constant_value : mollified_[i](to_chart(spec, cover().charts[i], x));
    acc += psi * gi;
  }
  return acc;
}

double SmoothedFunction::at_sample(int s) const { return assemble(graph_->point(s), partition_->at_sample(s)); }

double SmoothedFunction::near_sample(int s, const Vec& x) const {
  PartitionOfUnity::Weights w;
  partition_->weights(x, partition_->candidates_near_sample(s), w);
  return assemble(x, w);
}

double SmoothedFunction::operator()(const Vec& x) const {
  PartitionOfUnity::Weights w;
  partition_->weights(x, partition_->candidates(x), w);
  return assemble(x, w);
}

double SmoothedFunction::grid_step_near(int s) const {
  double step = std::numeric_limits<double>::infinity();
  for (int i : partition_->candidates_near_sample(s)) {
    step = std::min(step, plan_.charts[i].constant ? 1e-3 * cover().charts[i].radius : plan_.charts[i].grid_step);
  }
  return step;
}

ScalarField SmoothedFunction::sample_values() const {
  std::vector<double> v(graph_->size());
  for (int s = 0; s < graph_->size(); ++s) v[s] = at_sample(s);
  return ScalarField(std::move(v), "g");
}

namespace {

// Lip(f; B_i) from difference quotients of neighboring chart probes (closed
// form) or all member pairs (sample values), with manifold distances.
double chart_lipschitz(const SampledManifold& graph, const ScalarField& f, const ChartData& chart,
                       const std::vector<int>& members) {
  const ManifoldSpec& spec = graph.spec();
  double lip = 0.0;
  if (f.has_closed_form()) {
    const ProbeGrid grid(spec.intrinsic_dim(), chart.radius);
    std::vector<char> inside(grid.points.size(), 0);
    std::vector<Vec> pts(grid.points.size());
    std::vector<double> vals(grid.points.size(), 0.0);
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      if (chart.chart_norm(grid.points[p]) < chart.radius) {
        inside[p] = 1;
        pts[p] = from_chart(spec, chart, grid.points[p]);
        vals[p] = f.evaluate(pts[p]);
      }
    }
    for (int p = 0; p < static_cast<int>(grid.points.size()); ++p) {
      if (!inside[p]) continue;
      for (int a = 0; a < grid.dim; ++a) {
        const int q = grid.forward(p, a);
        if (q >= 0 && inside[q]) lip = std::max(lip, std::abs(vals[q] - vals[p]) / spec.distance(pts[p], pts[q]));
        // Diagonal neighbors catch gradients oblique to the grid.
        for (int b = a + 1; b < grid.dim; ++b) {
          const int d = q >= 0 ? grid.forward(q, b) : -1;
          if (d >= 0 && inside[d]) lip = std::max(lip, std::abs(vals[d] - vals[p]) / spec.distance(pts[p], pts[d]));
        }
      }
    }
    for (int s : members) {
      const Vec& x = graph.point(s);
      const double fx = f[s];
      const double dc = spec.distance(x, chart.center);
      if (dc > 0.0) lip = std::max(lip, std::abs(fx - f.evaluate(chart.center)) / dc);
    }
  } else {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const double d = spec.distance(graph.point(members[a]), graph.point(members[b]));
        if (d > 0.0) lip = std::max(lip, std::abs(f[members[a]] - f[members[b]]) / d);
      }
  }
  return lip;
}

struct ClosedFormExtension {
  ManifoldSpec spec;
  ChartData chart;
  std::shared_ptr<const ScalarField::Function> fn;
  McShaneExtension exterior;

  double operator()(const Vec& u) const {
    if (chart.chart_norm(u) < chart.radius) return (*fn)(from_chart(spec, chart, u));
    return exterior(u);
  }
};

}  // namespace

SmoothedFunction smooth_on_cover(const SampledManifold& graph, const ScalarField& f,
                                 std::shared_ptr<const PartitionOfUnity> partition, double eps, double lambda) {
  if (!(eps > 0.0) || !(lambda > 0.0)) throw InputError("smooth_approximate: eps and lambda must be positive");
  if (f.size() != graph.size()) throw InputError("smooth_approximate: field size does not match the graph");
  const CoverData& cover = partition->cover();
  const ManifoldSpec& spec = graph.spec();
  const int dim = spec.intrinsic_dim();
  const double r = cover.r;

  SmoothingPlan plan;
  plan.delta = cover.delta;
  plan.eps = eps;
  plan.lambda = lambda;
  plan.charts.resize(cover.size());
  std::vector<ChartFunction> extensions(cover.size());
  std::vector<MollifiedFunction> mollified;
  mollified.reserve(cover.size());

  for (int i = 0; i < cover.size(); ++i) {
    const ChartData& chart = cover.charts[i];
    ChartPlan& p = plan.charts[i];
    p.lip_ball = chart_lipschitz(graph, f, chart, cover.members[i]);
    p.extension_lipschitz = (1.0 + r) * p.lip_ball;
    if (p.lip_ball == 0.0) {
      p.constant = true;
      p.constant_value = f.has_closed_form() ? f.evaluate(chart.center) : f[cover.centers[i]];
      p.k = 1;
      p.grid_step = 0.25;
      extensions[i] = [c = p.constant_value](const Vec&) { return c; };
      mollified.emplace_back(extensions[i], dim, 1, 0.25);
      continue;
    }
    const double L = p.extension_lipschitz;
    const double C = chart.equiv_constant;
    const double k1 = L * C / eps;
    const double k2 = partition->lipschitz()[i] * L * C * cover.m[i] / r;
    const double kd = std::ceil(std::max({1.0, k1, k2}));
    if (!(kd < 1e9)) throw NumericError("smooth_approximate: mollifier scale k overflows on chart " + std::to_string(i));
    p.k = static_cast<int>(kd);
    p.grid_step = 1.0 / (4.0 * p.k);

    std::vector<std::pair<Vec, double>> data;
    for (int s : cover.members[i]) data.emplace_back(to_chart(spec, chart, graph.point(s)), f[s]);
    if (f.has_closed_form()) {
      std::vector<Vec> pts;
      std::vector<double> vals;
      for (const auto& [u, v] : data) {
        pts.push_back(u);
        vals.push_back(v);
      }
      for (const Vec& u : boundary_ring(chart.chart_norm, chart.radius)) {
        pts.push_back(u);
        vals.push_back(f.evaluate(from_chart(spec, chart, u)));
      }
      extensions[i] = ClosedFormExtension{spec, chart, f.closed_form(),
                                          McShaneExtension(std::move(pts), std::move(vals), L, chart.chart_norm)};
    } else {
      double Lc = L;
      for (std::size_t a = 0; a < data.size(); ++a)
        for (std::size_t b = a + 1; b < data.size(); ++b) {
          const double du = chart.chart_norm(data[a].first - data[b].first);
          if (du > 0.0) Lc = std::max(Lc, std::abs(data[a].second - data[b].second) / du);
        }
      auto ext = std::make_shared<McShaneExtension>(mcshane_extend(data, Lc * (1.0 + 1e-12), chart.chart_norm));
      extensions[i] = [ext](const Vec& u) { return (*ext)(u); };
    }
    mollified.push_back(mollify(extensions[i], dim, p.k, p.grid_step));
  }
  return SmoothedFunction(graph, std::move(partition), std::move(plan), std::move(extensions), std::move(mollified));
}

SmoothingReport audit_smoothing(const SampledManifold& graph, const ScalarField& f, const SmoothedFunction& g,
                                const ScalarField& g_values, double delta, double eps, double lambda,
                                const SmoothingOptions& options) {
  const ManifoldSpec& spec = graph.spec();
  const CoverData& cover = g.cover();
  const int n = graph.size();
  SmoothingReport rep;
  rep.delta = delta;
  rep.eps = eps;
  rep.lambda = lambda;
  rep.r = cover.r;
  rep.lip_f = cover.lip_f;
  rep.lambda_slack = options.lambda_slack;
  rep.lip_fraction_required = options.lip_fraction;
  rep.charts = cover.size();
  for (const auto& p : g.plan().charts) rep.max_k = std::max(rep.max_k, p.k);
  for (const auto& sc : cover.sample_charts) rep.max_overlap = std::max(rep.max_overlap, static_cast<int>(sc.size()));
  const double edge = graph.median_edge_length();
  rep.r_audit = options.audit_scale * edge;
  rep.rows.resize(n);

  double max_manifold_radius = 0.0;
  for (const auto& c : cover.charts) max_manifold_radius = std::max(max_manifold_radius, c.radius * (1.0 + cover.r));
  const double s_cap = delta - 2.0 * max_manifold_radius;

  std::vector<int> support;
  for (int s = 0; s < n; ++s)
    if (f[s] != 0.0) support.push_back(s);

  const std::vector<double> lipa = lip_a_all(g_values, graph, rep.r_audit);
  DijkstraWorkspace ws(graph);
  for (int s = 0; s < n; ++s) {
    SampleAudit& row = rep.rows[s];
    row.err_abs = std::abs(g_values[s] - f[s]);
    row.err_ok = row.err_abs <= eps;
    row.lipa_g = lipa[s];
    row.lipf_ball = edge_lipschitz(f, graph, ws.run(s, delta));
    const double lipf_wide = edge_lipschitz(f, graph, ws.run(s, delta + rep.r_audit));
    row.lip_ok = row.lipa_g <= row.lipf_ball + (1.0 + options.lambda_slack) * lambda;

    // Largest margin to the boundary among the charts containing x.
    double margin = 0.0;
    for (int i : cover.sample_charts[s]) {
      const ChartData& c = cover.charts[i];
      margin = std::max(margin, (c.radius - c.chart_norm(to_chart(spec, c, graph.point(s)))) / (1.0 + cover.r));
    }
    row.s_x = std::min(margin, s_cap);
    if (row.s_x < edge) ++rep.sub_resolution;
    // The graph estimate at scale r_audit is controlled by Lip(f; B_{delta + r_audit}(x)); where
    // that differs from Lip(f; B_delta(x)) the reference bound is not resolved at graph scale.
    row.resolved = lipf_wide <= row.lipf_ball + options.lambda_slack * lambda;

    bool near = false;
    for (int t : support) {
      if (spec.distance(graph.point(s), graph.point(t)) <= delta) {
        near = true;
        break;
      }
    }
    row.support_ok = near || g_values[s] == 0.0;

    rep.sup_err = std::max(rep.sup_err, row.err_abs);
    if (!row.err_ok) {
      rep.err_pass = false;
      if (rep.failures.size() < 20) rep.failures.push_back("sample " + std::to_string(s) + ": |g-f| = " + std::to_string(row.err_abs));
    }
    if (!row.support_ok) {
      rep.support_pass = false;
      if (rep.failures.size() < 20)
        rep.failures.push_back("sample " + std::to_string(s) + ": g != 0 farther than delta from spt f");
    }
    if (row.resolved) {
      ++rep.resolvable;
      if (row.lip_ok) ++rep.lip_ok_count;
      else if (rep.failures.size() < 20)
        rep.failures.push_back("sample " + std::to_string(s) + ": lip_a(g) = " + std::to_string(row.lipa_g) +
                               " > Lip(f;B) + slack*lambda = " +
                               std::to_string(row.lipf_ball + (1.0 + options.lambda_slack) * lambda));
    }
  }
  rep.lip_ok_fraction = rep.resolvable > 0 ? static_cast<double>(rep.lip_ok_count) / rep.resolvable : 0.0;
  rep.lip_pass = rep.resolvable > 0 && rep.lip_ok_fraction >= options.lip_fraction;
  if (rep.resolvable == 0) rep.failures.push_back("no resolvable sample for the lip_a audit");
  rep.passed = rep.err_pass && rep.lip_pass && rep.support_pass;
  return rep;
}

SmoothingResult smooth_approximate(const SampledManifold& graph, const ScalarField& f, double delta, double eps,
                                   double lambda, std::uint64_t seed, const SmoothingOptions& options) {
  if (!(delta > 0.0) || !(eps > 0.0) || !(lambda > 0.0)) {
    throw InputError("smooth_approximate: delta, eps and lambda must be positive");
  }
  auto cover = std::make_shared<const CoverData>(build_cover(graph, f, delta, lambda, seed, options.cover));
  auto partition = std::make_shared<const PartitionOfUnity>(build_partition(cover, graph));
  SmoothedFunction g = smooth_on_cover(graph, f, partition, eps, lambda);
  ScalarField values = g.sample_values();
  SmoothingReport report;
  if (options.audit) {
    report = audit_smoothing(graph, f, g, values, delta, eps, lambda, options);
  } else {
    report.delta = delta;
    report.eps = eps;
    report.lambda = lambda;
    report.r = cover->r;
    report.lip_f = cover->lip_f;
    report.charts = cover->size();
  }
  return {std::move(g), std::move(values), std::move(report)};
}

void write_smoothing_csv(std::ostream& out, const SmoothingReport& report) {
  out << "index,err_abs,lipa_g,lipf_ball,bound_ok,support_ok\n";
  char buf[128];
  for (std::size_t s = 0; s < report.rows.size(); ++s) {
    const SampleAudit& row = report.rows[s];
    const char* bound = !row.err_ok ? "false" : !row.resolved ? "unresolved" : row.lip_ok ? "true" : "false";
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%s,%s\n", s, row.err_abs, row.lipa_g, row.lipf_ball, bound,
                  row.support_ok ? "true" : "false");
    out << buf;
  }
}

nlohmann::json to_json(const SmoothingReport& report) {
  return {{"delta", report.delta},
          {"eps", report.eps},
          {"lambda", report.lambda},
          {"r", report.r},
          {"lip_f", report.lip_f},
          {"r_audit", report.r_audit},
          {"lambda_slack", report.lambda_slack},
          {"lip_fraction_required", report.lip_fraction_required},
          {"charts", report.charts},
          {"max_k", report.max_k},
          {"max_overlap", report.max_overlap},
          {"kernel", "exp_bump"},
          {"samples", report.rows.size()},
          {"sup_err", report.sup_err},
          {"resolvable", report.resolvable},
          {"s_x_below_edge", report.sub_resolution},
          {"lip_ok_count", report.lip_ok_count},
          {"lip_ok_fraction", report.lip_ok_fraction},
          {"err_pass", report.err_pass},
          {"lip_pass", report.lip_pass},
          {"support_pass", report.support_pass},
          {"passed", report.passed},
          {"failures", report.failures}};
}

}  // namespace finslerkit
