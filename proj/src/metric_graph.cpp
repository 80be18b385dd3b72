#include "finslerkit/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <queue>
#include <unordered_map>

namespace finslerkit {

namespace {

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11};

Mat random_rotation3(Rng& rng) {
  Eigen::Vector4d q = random_normal(rng, 4);
  q.normalize();
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
}

double density_shape(const ManifoldSpec& spec, const Vec& x) {
  switch (spec.kind()) {
    case ManifoldKind::sphere2: return x[2] / spec.radius();
    case ManifoldKind::flat_torus2:
      return std::sin(2.0 * std::numbers::pi * x[0] / spec.periods()[0]) *
             std::cos(2.0 * std::numbers::pi * x[1] / spec.periods()[1]);
    default: {
      const double width = spec.domain_hi() - spec.domain_lo();
      double s = 1.0;
      for (int i = 0; i < std::min<int>(2, static_cast<int>(x.size())); ++i) {
        s *= std::cos(std::numbers::pi * (x[i] - spec.domain_lo()) / width);
      }
      return s;
    }
  }
}

int nearest_point(const ManifoldSpec& spec, const std::vector<Vec>& points, const Vec& x) {
  int best = 0;
  double best_d = kUnreachable;
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    const double d = spec.coordinate_distance(points[i], x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// k nearest neighbors in chart coordinates by brute force.
std::vector<std::vector<int>> knn(const ManifoldSpec& spec, const std::vector<Vec>& points, int k) {
  const int n = static_cast<int>(points.size());
  const CoordinateMetric metric(spec);
  const int dim = metric.dim();
  const std::vector<double> flat = CoordinateMetric::flatten(points, dim);

  std::vector<std::vector<int>> result(n);
  std::vector<std::pair<double, int>> heap;
  heap.reserve(k + 1);
  for (int i = 0; i < n; ++i) {
    heap.clear();
    const double* xi = &flat[static_cast<std::size_t>(i) * dim];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = metric.squared(xi, &flat[static_cast<std::size_t>(j) * dim]);
      if (static_cast<int>(heap.size()) < k) {
        heap.emplace_back(d2, j);
        std::push_heap(heap.begin(), heap.end());
      } else if (d2 < heap.front().first || (d2 == heap.front().first && j < heap.front().second)) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = {d2, j};
        std::push_heap(heap.begin(), heap.end());
      }
    }
    result[i].reserve(heap.size());
    for (const auto& [d2, j] : heap) result[i].push_back(j);
  }
  return result;
}

}  // namespace

CoordinateMetric::CoordinateMetric(const ManifoldSpec& spec)
    : dim_(spec.ambient_dim()), torus_(spec.kind() == ManifoldKind::flat_torus2) {
  if (torus_) {
    g00_ = spec.torus_metric()(0, 0);
    g01_ = spec.torus_metric()(0, 1);
    g11_ = spec.torus_metric()(1, 1);
    p0_ = spec.periods()[0];
    p1_ = spec.periods()[1];
  }
}

double CoordinateMetric::squared(const double* a, const double* b) const {
  if (torus_) {
    auto wrap = [](double d, double p) {
      if (d > 0.5 * p) return d - p;
      if (d < -0.5 * p) return d + p;
      return d;
    };
    const double dx = wrap(b[0] - a[0], p0_), dy = wrap(b[1] - a[1], p1_);
    return g00_ * dx * dx + 2.0 * g01_ * dx * dy + g11_ * dy * dy;
  }
  double d2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double d = b[i] - a[i];
    d2 += d * d;
  }
  return d2;
}

std::vector<double> CoordinateMetric::flatten(const std::vector<Vec>& points, int dim) {
  std::vector<double> flat(points.size() * static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int a = 0; a < dim; ++a) flat[i * dim + a] = points[i][a];
  return flat;
}

SampledManifold::SampledManifold(ManifoldSpec spec, std::vector<Vec> points, std::vector<std::vector<Edge>> adjacency,
                                 WeightedMeasure measure)
    : spec_(std::move(spec)), points_(std::move(points)), adjacency_(std::move(adjacency)), measure_(std::move(measure)) {
  if (adjacency_.size() != points_.size() || measure_.weights.size() != points_.size()) {
    throw InputError("SampledManifold: points, adjacency and weights must have equal length");
  }
}

std::size_t SampledManifold::edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : adjacency_) total += nb.size();
  return total / 2;
}

double SampledManifold::median_edge_length() const {
  std::vector<double> lengths;
  lengths.reserve(edge_count());
  for (int i = 0; i < size(); ++i)
    for (const auto& e : adjacency_[i])
      if (e.to > i) lengths.push_back(e.length);
  if (lengths.empty()) return 0.0;
  auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
  std::nth_element(lengths.begin(), mid, lengths.end());
  return *mid;
}

bool SampledManifold::connected() const {
  if (points_.empty()) return true;
  std::vector<char> seen(points_.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& e : adjacency_[v]) {
      if (!seen[e.to]) {
        seen[e.to] = 1;
        ++count;
        stack.push_back(e.to);
      }
    }
  }
  return count == points_.size();
}

SampledManifold SampledManifold::with_measure(WeightedMeasure measure) const {
  return SampledManifold(spec_, points_, adjacency_, std::move(measure));
}

std::vector<Vec> sample_points(const ManifoldSpec& spec, int n, std::uint64_t seed) {
  if (n < 2) throw InputError("sample_manifold: n must be >= 2");
  Rng rng(seed);
  std::vector<Vec> points;
  points.reserve(n);
  switch (spec.kind()) {
    case ManifoldKind::sphere2: {
      const Mat rot = random_rotation3(rng);
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int j = 0; j < n; ++j) {
        const double z = 1.0 - 2.0 * (j + 0.5) / n;
        const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
        Vec u(3);
        u << rad * std::cos(golden * j), rad * std::sin(golden * j), z;
        points.push_back(spec.normalize_point(spec.radius() * (rot * u)));
      }
      break;
    }
    case ManifoldKind::flat_torus2: {
      const double s0 = random_uniform(rng, 0.0, 1.0), s1 = random_uniform(rng, 0.0, 1.0);
      for (int j = 1; j <= n; ++j) {
        Vec x(2);
        x << std::fmod(radical_inverse(j, 2) + s0, 1.0) * spec.periods()[0],
            std::fmod(radical_inverse(j, 3) + s1, 1.0) * spec.periods()[1];
        points.push_back(spec.normalize_point(x));
      }
      break;
    }
    default: {
      const int dim = spec.intrinsic_dim();
      if (dim > 5) throw InputError("sample_manifold: box domains support dim <= 5");
      std::vector<double> shift(dim);
      for (auto& s : shift) s = random_uniform(rng, 0.0, 1.0);
      const double lo = spec.domain_lo(), width = spec.domain_hi() - spec.domain_lo();
      for (int j = 1; j <= n; ++j) {
        Vec x(dim);
        for (int a = 0; a < dim; ++a) x[a] = lo + width * std::fmod(radical_inverse(j, kHaltonBases[a]) + shift[a], 1.0);
        points.push_back(x);
      }
      break;
    }
  }
  return points;
}

WeightedMeasure make_measure(const ManifoldSpec& spec, const std::vector<Vec>& points, const MeasureSpec& measure) {
  const int n = static_cast<int>(points.size());
  WeightedMeasure w;
  w.weights.assign(n, 0.0);
  if (measure.density != MeasureSpec::Density::none) {
    if (!(measure.mass > 0.0)) throw InputError("measure: mass must be positive");
    if (measure.density == MeasureSpec::Density::uniform) {
      std::fill(w.weights.begin(), w.weights.end(), measure.mass / n);
    } else {
      if (!(std::abs(measure.amplitude) < 1.0)) throw InputError("measure: smooth amplitude must lie in (-1,1)");
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        w.weights[i] = 1.0 + measure.amplitude * density_shape(spec, points[i]);
        sum += w.weights[i];
      }
      for (auto& x : w.weights) x *= measure.mass / sum;
    }
  }
  for (const auto& atom : measure.atoms) {
    if (!(atom.mass >= 0.0)) throw InputError("measure: atom masses must be >= 0");
    if (atom.point.size() != spec.ambient_dim()) throw InputError("measure: atom has wrong dimension");
    w.weights[nearest_point(spec, points, spec.normalize_point(atom.point))] += atom.mass;
  }
  for (double x : w.weights) w.total_mass += x;
  if (!(w.total_mass > 0.0)) throw InputError("measure: total mass must be positive");
  return w;
}

SampledManifold build_graph(const ManifoldSpec& spec, std::vector<Vec> points, std::vector<double> weights, int k) {
  if (points.size() < 2) throw InputError("build_graph: need at least 2 points");
  if (weights.size() != points.size()) throw InputError("build_graph: one weight per point required");
  if (k < 1) throw InputError("build_graph: k must be >= 1");

  // Merge coincident points (quantized at 1e-9), summing their weights.
  std::vector<Vec> merged;
  std::vector<double> merged_w;
  {
    struct KeyHash {
      std::size_t operator()(const std::vector<long long>& key) const {
        std::size_t h = 1469598103934665603ULL;
        for (long long v : key) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ULL;
        return h;
      }
    };
    std::unordered_map<std::vector<long long>, int, KeyHash> index;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Vec p = spec.normalize_point(points[i]);
      std::vector<long long> key(p.size());
      for (int a = 0; a < p.size(); ++a) key[a] = std::llround(p[a] * 1e9);
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(merged.size()));
      if (inserted) {
        merged.push_back(p);
        merged_w.push_back(weights[i]);
      } else {
        merged_w[it->second] += weights[i];
      }
    }
  }
  const int n = static_cast<int>(merged.size());
  if (n < 2) throw InputError("build_graph: fewer than 2 distinct points");
  const int kk = std::min(k, n - 1);

  const auto nn = knn(spec, merged, kk);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * kk);
  for (int i = 0; i < n; ++i)
    for (int j : nn[i]) pairs.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<std::vector<Edge>> adjacency(n);
  for (const auto& [a, b] : pairs) {
    const double len = spec.segment_length(merged[a], merged[b]);
    if (!(len > 0.0) || !std::isfinite(len)) throw ConstructionError("build_graph: non-positive edge length");
    adjacency[a].push_back({b, len});
    adjacency[b].push_back({a, len});
  }
  WeightedMeasure measure;
  measure.weights = std::move(merged_w);
  for (double w : measure.weights) measure.total_mass += w;
  SampledManifold graph(spec, std::move(merged), std::move(adjacency), std::move(measure));
  if (!graph.connected()) {
    throw ConstructionError("build_graph: k-nearest-neighbor graph with k=" + std::to_string(kk) +
                            " is disconnected; use a larger k");
  }
  return graph;
}

SampledManifold sample_manifold(const ManifoldSpec& spec, int n, const MeasureSpec& measure, std::uint64_t seed,
                                int k) {
  if (n < 2) throw InputError("sample_manifold: n must be >= 2");
  std::vector<Vec> points;
  if (measure.density == MeasureSpec::Density::none && static_cast<int>(measure.atoms.size()) == n) {
    for (const auto& atom : measure.atoms) points.push_back(spec.normalize_point(atom.point));
  } else {
    points = sample_points(spec, n, seed);
  }
  WeightedMeasure w = make_measure(spec, points, measure);
  return build_graph(spec, std::move(points), std::move(w.weights), k);
}

DijkstraWorkspace::DijkstraWorkspace(const SampledManifold& graph)
    : graph_(&graph), dist_(graph.size(), kUnreachable) {}

const std::vector<int>& DijkstraWorkspace::run(int source, double cutoff) {
  if (source < 0 || source >= graph_->size()) throw InputError("graph_distance: source index out of range");
  for (int v : reached_) dist_[v] = kUnreachable;
  reached_.clear();
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist_[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist_[v]) continue;
    if (!reached_.empty() && reached_.back() == v) continue;
    reached_.push_back(v);
    for (const auto& e : graph_->neighbors(v)) {
      const double nd = d + e.length;
      if (nd < dist_[e.to] && nd <= cutoff) {
        dist_[e.to] = nd;
        heap.emplace(nd, e.to);
      }
    }
  }
  return reached_;
}

Mat graph_distance(const SampledManifold& graph, const std::vector<int>& sources, const std::vector<int>& targets) {
  for (int t : targets)
    if (t < 0 || t >= graph.size()) throw InputError("graph_distance: target index out of range");
  DijkstraWorkspace ws(graph);
  Mat out(sources.size(), targets.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    ws.run(sources[s]);
    for (std::size_t t = 0; t < targets.size(); ++t) out(s, t) = ws.distance(targets[t]);
  }
  return out;
}

void write_distance_csv(std::ostream& out, const Mat& distances, const std::vector<int>& sources,
                        const std::vector<int>& targets) {
  out << "src,dst,distance\n";
  char buf[64];
  for (std::size_t s = 0; s < sources.size(); ++s) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", distances(s, t));
      out << sources[s] << ',' << targets[t] << ',' << buf << '\n';
    }
  }
}

std::vector<int> graph_ball(const SampledManifold& graph, int x, double r) {
  DijkstraWorkspace ws(graph);
  return ws.run(x, r);
}

ScalarField::ScalarField(std::vector<double> values, std::string name)
    : values_(std::move(values)), name_(std::move(name)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw InputError("ScalarField: values must be finite");
}

ScalarField ScalarField::from_function(const SampledManifold& graph, Function fn, std::string name) {
  std::vector<double> values(graph.size());
  for (int i = 0; i < graph.size(); ++i) values[i] = fn(graph.point(i));
  ScalarField f(std::move(values), std::move(name));
  f.closed_form_ = std::make_shared<const Function>(std::move(fn));
  return f;
}

double ScalarField::evaluate(const Vec& x) const {
  if (!closed_form_) throw InputError("ScalarField '" + name_ + "' has no closed form");
  return (*closed_form_)(x);
}

namespace {

ScalarField combine(const ScalarField& a, const ScalarField& b, double sb, const char* op) {
  if (a.size() != b.size()) throw InputError("ScalarField: size mismatch");
  std::vector<double> v(a.size());
  for (int i = 0; i < a.size(); ++i) v[i] = a[i] + sb * b[i];
  return ScalarField(std::move(v), "(" + a.name() + op + b.name() + ")");
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField r = combine(a, b, 1.0, "+");
  if (a.closed_form_ && b.closed_form_) {
    auto fa = a.closed_form_, fb = b.closed_form_;
    r.closed_form_ = std::make_shared<const ScalarField::Function>([fa, fb](const Vec& x) { return (*fa)(x) + (*fb)(x); });
  }
  return r;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField r = combine(a, b, -1.0, "-");
  if (a.closed_form_ && b.closed_form_) {
    auto fa = a.closed_form_, fb = b.closed_form_;
    r.closed_form_ = std::make_shared<const ScalarField::Function>([fa, fb](const Vec& x) { return (*fa)(x) - (*fb)(x); });
  }
  return r;
}

ScalarField operator*(double c, const ScalarField& a) {
  std::vector<double> v(a.values_);
  for (auto& x : v) x *= c;
  ScalarField r(std::move(v), std::to_string(c) + "*" + a.name_);
  if (a.closed_form_) {
    auto fa = a.closed_form_;
    r.closed_form_ = std::make_shared<const ScalarField::Function>([fa, c](const Vec& x) { return c * (*fa)(x); });
  }
  return r;
}

double edge_lipschitz(const ScalarField& f, const SampledManifold& graph, const std::vector<int>& members) {
  std::vector<char> in(graph.size(), 0);
  for (int m : members) in[m] = 1;
  double best = 0.0;
  for (int a : members) {
    for (const auto& e : graph.neighbors(a)) {
      if (e.to > a && in[e.to]) best = std::max(best, std::abs(f[a] - f[e.to]) / e.length);
    }
  }
  return best;
}

double lip_global(const ScalarField& f, const SampledManifold& graph) {
  double best = 0.0;
  for (int a = 0; a < graph.size(); ++a)
    for (const auto& e : graph.neighbors(a))
      if (e.to > a) best = std::max(best, std::abs(f[a] - f[e.to]) / e.length);
  return best;
}

double lip_global(const ScalarField& f, const SampledManifold& graph, const std::vector<int>& subset) {
  if (f.size() != graph.size()) throw InputError("lip_global: field size does not match the graph");
  if (subset.size() < 2) throw InputError("lip_global: subset needs at least 2 points");
  std::vector<char> in(graph.size(), 0);
  int distinct = 0;
  for (int s : subset) {
    if (s < 0 || s >= graph.size()) throw InputError("lip_global: index out of range");
    if (!in[s]) ++distinct;
    in[s] = 1;
  }
  // Every shortest path is made of edges, so on the full vertex set the
  // pairwise maximum is attained on an edge.
  if (distinct == graph.size()) return lip_global(f, graph);

  DijkstraWorkspace ws(graph);
  double best = 0.0;
  for (int s : subset) {
    ws.run(s);
    for (int t : subset) {
      if (t == s) continue;
      const double d = ws.distance(t);
      if (d > 0.0 && std::isfinite(d)) best = std::max(best, std::abs(f[s] - f[t]) / d);
    }
  }
  return best;
}

double lip_a_est(const ScalarField& f, const SampledManifold& graph, int x, double r) {
  if (f.size() != graph.size()) throw InputError("lip_a_est: field size does not match the graph");
  if (!(r > 0.0)) throw InputError("lip_a_est: r must be positive");
  DijkstraWorkspace ws(graph);
  const std::vector<int> ball = ws.run(x, r);
  if (ball.size() < 2) throw PreconditionError("lip_a_est: degenerate ball (fewer than 2 points) at index " + std::to_string(x));
  std::vector<char> in(graph.size(), 0);
  for (int b : ball) in[b] = 1;
  double best = 0.0;
  for (int y : ball) {
    for (int z : ws.run(y, 2.0 * r)) {
      if (z > y && in[z]) best = std::max(best, std::abs(f[y] - f[z]) / ws.distance(z));
    }
  }
  return best;
}

std::vector<double> lip_a_all(const ScalarField& f, const SampledManifold& graph, double r) {
  if (f.size() != graph.size()) throw InputError("lip_a_est: field size does not match the graph");
  if (!(r > 0.0)) throw InputError("lip_a_est: r must be positive");
  const int n = graph.size();
  DijkstraWorkspace ws(graph);
  std::vector<std::vector<std::pair<int, double>>> table(n);
  for (int y = 0; y < n; ++y) {
    for (int z : ws.run(y, 2.0 * r)) table[y].emplace_back(z, ws.distance(z));
  }
  std::vector<double> out(n, 0.0);
  std::vector<char> in(n, 0);
  for (int x = 0; x < n; ++x) {
    int members = 0;
    for (const auto& [y, d] : table[x]) {
      if (d <= r) {
        in[y] = 1;
        ++members;
      }
    }
    if (members < 2) throw PreconditionError("lip_a_est: degenerate ball (fewer than 2 points) at index " + std::to_string(x));
    double best = 0.0;
    for (const auto& [y, dy] : table[x]) {
      if (dy > r) continue;
      for (const auto& [z, dz] : table[y]) {
        if (z > y && in[z]) best = std::max(best, std::abs(f[y] - f[z]) / dz);
      }
    }
    for (const auto& [y, d] : table[x]) in[y] = 0;
    out[x] = best;
  }
  return out;
}

McShaneExtension::McShaneExtension(std::vector<Vec> points, std::vector<double> values, double lipschitz,
                                   MinkowskiNorm norm)
    : points_(std::move(points)), values_(std::move(values)), lipschitz_(lipschitz), norm_(std::move(norm)) {}

double McShaneExtension::operator()(const Vec& v) const {
  double best = kUnreachable;
  for (std::size_t j = 0; j < points_.size(); ++j) {
    const double d = norm_(v - points_[j]);
    if (d == 0.0) return values_[j];
    best = std::min(best, values_[j] + lipschitz_ * d);
  }
  return best;
}

McShaneExtension mcshane_extend(const std::vector<std::pair<Vec, double>>& values, double lipschitz,
                                const MinkowskiNorm& norm) {
  if (values.empty()) throw InputError("mcshane_extend: no sample values");
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) throw InputError("mcshane_extend: L must be finite and >= 0");
  std::vector<Vec> pts;
  std::vector<double> vals;
  pts.reserve(values.size());
  vals.reserve(values.size());
  for (const auto& [p, v] : values) {
    if (p.size() != norm.dim()) throw InputError("mcshane_extend: point dimension does not match the norm");
    pts.push_back(p);
    vals.push_back(v);
  }
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double diff = std::abs(vals[a] - vals[b]);
      const double bound = lipschitz * norm(pts[a] - pts[b]);
      if (diff > bound * (1.0 + 1e-12) + 1e-300) {
        throw PreconditionError("mcshane_extend: values are not L-Lipschitz on pair (" + std::to_string(a) + ", " +
                                std::to_string(b) + "): |df| = " + std::to_string(diff) + " > " + std::to_string(bound));
      }
    }
  }
  return McShaneExtension(std::move(pts), std::move(vals), lipschitz, norm);
}

nlohmann::json to_json(const SampledManifold& graph) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : graph.points()) points.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  nlohmann::json edges = nlohmann::json::array();
  for (int a = 0; a < graph.size(); ++a)
    for (const auto& e : graph.neighbors(a))
      if (e.to > a) edges.push_back({a, e.to, e.length});
  return {{"manifold", to_json(graph.spec())},
          {"points", points},
          {"edges", edges},
          {"weights", graph.measure().weights}};
}

SampledManifold sampled_manifold_from_json(const nlohmann::json& doc) {
  try {
    const ManifoldSpec spec = manifold_from_json(doc.at("manifold"));
    std::vector<Vec> points;
    for (const auto& p : doc.at("points")) {
      const auto xs = p.get<std::vector<double>>();
      points.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size())));
    }
    std::vector<std::vector<Edge>> adjacency(points.size());
    for (const auto& e : doc.at("edges")) {
      const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
      const double len = e.at(2).get<double>();
      if (a < 0 || b < 0 || a >= static_cast<int>(points.size()) || b >= static_cast<int>(points.size())) {
        throw InputError("sampled manifold: edge index out of range");
      }
      adjacency[a].push_back({b, len});
      adjacency[b].push_back({a, len});
    }
    WeightedMeasure measure;
    measure.weights = doc.at("weights").get<std::vector<double>>();
    for (double w : measure.weights) measure.total_mass += w;
    return SampledManifold(spec, std::move(points), std::move(adjacency), std::move(measure));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("sampled manifold: ") + e.what());
  }
}

}  // namespace finslerkit
