#include "finslerkit/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>

namespace finslerkit {

MinkowskiNorm fiber_norm(const ManifoldSpec& spec, const Vec& x) {
  if (spec.is_riemannian()) return MinkowskiNorm::euclidean(spec.intrinsic_dim());
  return spec.norm_at(x).transformed(spec.tangent_frame(x));
}

namespace {

// y(u) = exp_x(I_x u) in the probe chart at x.
Vec probe_point(const ManifoldSpec& spec, const Vec& x, const Mat& frame, const Vec& u) {
  switch (spec.kind()) {
    case ManifoldKind::sphere2: return sphere_exp(spec.radius(), x, frame * u);
    case ManifoldKind::flat_torus2: return spec.normalize_point(x + frame * u);
    default: return x + frame * u;
  }
}

Vec central_gradient(const ManifoldSpec& spec, const Vec& x, double step, const std::function<double(const Vec&)>& g) {
  const int dim = spec.intrinsic_dim();
  const Mat frame = spec.tangent_frame(x);
  Vec grad(dim);
  for (int a = 0; a < dim; ++a) {
    Vec u = Vec::Zero(dim);
    u[a] = step;
    const double plus = g(probe_point(spec, x, frame, u));
    const double minus = g(probe_point(spec, x, frame, -u));
    grad[a] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

}  // namespace

Vec pointwise_differential(const SmoothedFunction& g, const SampledManifold& graph, int x) {
  if (x < 0 || x >= graph.size()) throw InputError("pointwise_differential: sample index out of range");
  const double step = 0.5 * g.grid_step_near(x);
  try {
    return central_gradient(graph.spec(), graph.point(x), step, [&](const Vec& y) { return g.near_sample(x, y); });
  } catch (const ConstructionError&) {
    throw NumericError("pointwise_differential: stencil at sample " + std::to_string(x) + " leaves the cover");
  }
}

Vec pointwise_differential(const ScalarField::Function& fn, const SampledManifold& graph, int x, double step) {
  if (x < 0 || x >= graph.size()) throw InputError("pointwise_differential: sample index out of range");
  if (!(step > 0.0)) throw InputError("pointwise_differential: step must be positive");
  return central_gradient(graph.spec(), graph.point(x), step, fn);
}

CovectorField make_covector_field(const SampledManifold& graph, std::vector<Vec> covectors) {
  if (static_cast<int>(covectors.size()) != graph.size()) throw InputError("covector field: one covector per sample");
  CovectorField out;
  out.norms.resize(covectors.size());
  for (int s = 0; s < graph.size(); ++s) out.norms[s] = dual_norm_convex(fiber_norm(graph.spec(), graph.point(s)), covectors[s]);
  out.covectors = std::move(covectors);
  return out;
}

CovectorField differential_field(const SmoothedFunction& g, const SampledManifold& graph) {
  std::vector<Vec> cov(graph.size());
  for (int s = 0; s < graph.size(); ++s) cov[s] = pointwise_differential(g, graph, s);
  return make_covector_field(graph, std::move(cov));
}

VectorField make_vector_field(const SampledManifold& graph, std::vector<Vec> vectors) {
  if (static_cast<int>(vectors.size()) != graph.size()) throw InputError("vector field: one vector per sample");
  VectorField out;
  out.norms.resize(vectors.size());
  for (int s = 0; s < graph.size(); ++s) out.norms[s] = fiber_norm(graph.spec(), graph.point(s))(vectors[s]);
  out.vectors = std::move(vectors);
  return out;
}

std::vector<double> pairing(const CovectorField& omega, const VectorField& v) {
  if (omega.covectors.size() != v.vectors.size()) throw InputError("pairing: fields have different sizes");
  std::vector<double> out(v.vectors.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = omega.covectors[s].dot(v.vectors[s]);
  return out;
}

double WugLadder::max_r() const {
  double r = 0.0;
  for (const auto& p : partitions) r = std::max(r, p->cover().r);
  return r;
}

WugLadder build_wug_ladder(const SampledManifold& graph, double delta, double eps, double lambda, std::uint64_t seed,
                           int rungs) {
  if (rungs < 1) throw InputError("wug_estimate: at least one rung required");
  if (!(delta > 0.0) || !(eps > 0.0) || !(lambda > 0.0)) throw InputError("wug_estimate: delta, eps, lambda must be positive");
  WugLadder ladder;
  ladder.delta = delta;
  for (int j = 0; j < rungs; ++j) {
    const double ej = std::ldexp(eps, -j), lj = std::ldexp(lambda, -j);
    auto cover = std::make_shared<const CoverData>(build_cover(graph, 1.0, delta, lj, seed + static_cast<std::uint64_t>(j)));
    ladder.eps.push_back(ej);
    ladder.lambda.push_back(lj);
    ladder.partitions.push_back(std::make_shared<const PartitionOfUnity>(build_partition(cover, graph)));
  }
  return ladder;
}

WugResult wug_estimate(const ScalarField& f, const SampledManifold& graph, const WugLadder& ladder) {
  if (f.size() != graph.size()) throw InputError("wug_estimate: field size does not match the graph");
  const int n = graph.size();
  WugResult out;
  out.lipschitz_scale = lip_global(f, graph);
  out.values.assign(n, 0.0);
  out.per_rung.assign(ladder.rungs(), std::vector<double>(n, 0.0));
  if (out.lipschitz_scale == 0.0) return out;
  const double s = out.lipschitz_scale;
  const ScalarField unit = (1.0 / s) * f;
  std::vector<MinkowskiNorm> fibers;
  fibers.reserve(n);
  for (int x = 0; x < n; ++x) fibers.push_back(fiber_norm(graph.spec(), graph.point(x)));
  for (int j = 0; j < ladder.rungs(); ++j) {
    const SmoothedFunction g = smooth_on_cover(graph, unit, ladder.partitions[j], ladder.eps[j], ladder.lambda[j]);
    for (int x = 0; x < n; ++x) out.per_rung[j][x] = s * dual_norm_convex(fibers[x], pointwise_differential(g, graph, x));
  }
  for (int x = 0; x < n; ++x) {
    double w = out.per_rung[0][x];
    for (int j = 1; j < ladder.rungs(); ++j) w = std::min(w, out.per_rung[j][x]);
    out.values[x] = w;
  }
  return out;
}

WugResult wug_estimate(const ScalarField& f, const SampledManifold& graph, double delta, double eps, double lambda,
                       std::uint64_t seed, int rungs) {
  return wug_estimate(f, graph, build_wug_ladder(graph, delta, eps, lambda, seed, rungs));
}

std::string to_string(HilbertVerdict v) {
  switch (v) {
    case HilbertVerdict::hilbertian_within_tol: return "hilbertian_within_tol";
    case HilbertVerdict::non_hilbertian: return "non_hilbertian";
    case HilbertVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

HilbertianityReport hilbertianity_from_wug(const WeightedMeasure& mu, const std::vector<double>& w_f,
                                           const std::vector<double>& w_g, const std::vector<double>& w_sum,
                                           const std::vector<double>& w_diff, bool riemannian, double eps_chart,
                                           const HilbertParams& params) {
  const std::size_t n = mu.weights.size();
  if (w_f.size() != n || w_g.size() != n || w_sum.size() != n || w_diff.size() != n) {
    throw InputError("hilbertianity_check: measure and gradient arrays differ in length");
  }
  HilbertianityReport rep;
  rep.params = params;
  rep.riemannian = riemannian;
  rep.eps_chart = eps_chart;
  rep.weights = mu.weights;
  rep.w_f = w_f;
  rep.w_g = w_g;
  rep.w_sum = w_sum;
  rep.w_diff = w_diff;
  rep.defect.resize(n);
  std::vector<double> ref(n);
  for (std::size_t s = 0; s < n; ++s) {
    rep.defect[s] = w_sum[s] * w_sum[s] + w_diff[s] * w_diff[s] - 2.0 * w_f[s] * w_f[s] - 2.0 * w_g[s] * w_g[s];
    ref[s] = 2.0 * w_f[s] * w_f[s] + 2.0 * w_g[s] * w_g[s];
    rep.integrated_abs += mu.weights[s] * std::abs(rep.defect[s]);
    rep.integrated_signed += mu.weights[s] * rep.defect[s];
    rep.reference += mu.weights[s] * ref[s];
  }
  rep.relative = rep.reference > 0.0 ? rep.integrated_abs / rep.reference : 0.0;

  double total = 0.0, same = 0.0;
  const double sign = rep.integrated_signed >= 0.0 ? 1.0 : -1.0;
  for (std::size_t s = 0; s < n; ++s) {
    total += mu.weights[s];
    if (rep.defect[s] * sign > 0.0) same += mu.weights[s];
  }
  rep.consistent_sign_mass = total > 0.0 ? same / total : 0.0;

  std::vector<double> sorted = mu.weights;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double acc = 0.0;
  for (double w : sorted) {
    if (acc >= params.mass_fraction * total) break;
    acc += w;
    ++rep.support_count;
  }

  if (rep.support_count < params.min_support) {
    rep.verdict = HilbertVerdict::inconclusive;
  } else if (rep.relative <= params.tol_h) {
    rep.verdict = HilbertVerdict::hilbertian_within_tol;
  } else if (rep.relative >= params.tol_nh && rep.consistent_sign_mass >= params.sign_fraction) {
    rep.verdict = HilbertVerdict::non_hilbertian;
  } else {
    rep.verdict = HilbertVerdict::inconclusive;
  }

  rep.sandwich_factor = std::pow(1.0 + eps_chart, 4) - 1.0;
  if (riemannian) {
    std::size_t ok = 0;
    for (std::size_t s = 0; s < n; ++s)
      if (std::abs(rep.defect[s]) <= rep.sandwich_factor * ref[s]) ++ok;
    rep.sandwich_ok_fraction = n > 0 ? static_cast<double>(ok) / n : 1.0;
    rep.sandwich_pass = rep.sandwich_ok_fraction >= params.sandwich_fraction;
  }
  return rep;
}

double HilbertParams::eps_for(const SampledManifold& graph) const {
  return mesh_relative ? eps * graph.median_edge_length() : eps;
}

double HilbertParams::lambda_for(const SampledManifold& graph) const {
  return mesh_relative ? lambda * graph.median_edge_length() : lambda;
}

HilbertianityReport hilbertianity_check(const SampledManifold& graph, const WeightedMeasure& mu, const ScalarField& f,
                                        const ScalarField& g, const HilbertParams& params) {
  if (static_cast<int>(mu.weights.size()) != graph.size()) throw InputError("hilbertianity_check: one weight per sample");
  const WugLadder ladder = build_wug_ladder(graph, params.delta, params.eps_for(graph), params.lambda_for(graph), params.seed, params.rungs);
  const auto wf = wug_estimate(f, graph, ladder);
  const auto wg = wug_estimate(g, graph, ladder);
  const auto ws = wug_estimate(f + g, graph, ladder);
  const auto wd = wug_estimate(f - g, graph, ladder);
  return hilbertianity_from_wug(mu, wf.values, wg.values, ws.values, wd.values, graph.spec().is_riemannian(),
                                ladder.max_r(), params);
}

void write_hilbert_csv(std::ostream& out, const HilbertianityReport& report) {
  out << "index,weight,W_f,W_g,W_sum,W_diff,defect\n";
  char buf[256];
  for (std::size_t s = 0; s < report.defect.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s, report.weights[s], report.w_f[s],
                  report.w_g[s], report.w_sum[s], report.w_diff[s], report.defect[s]);
    out << buf;
  }
}

nlohmann::json to_json(const HilbertianityReport& report) {
  return {{"verdict", to_string(report.verdict)},
          {"integrated_abs_defect", report.integrated_abs},
          {"integrated_signed_defect", report.integrated_signed},
          {"reference", report.reference},
          {"relative_defect", report.relative},
          {"consistent_sign_mass", report.consistent_sign_mass},
          {"support_count", report.support_count},
          {"samples", report.defect.size()},
          {"riemannian", report.riemannian},
          {"eps_chart", report.eps_chart},
          {"sandwich_factor", report.sandwich_factor},
          {"sandwich_ok_fraction", report.sandwich_ok_fraction},
          {"sandwich_pass", report.sandwich_pass},
          {"thresholds",
           {{"tol_h", report.params.tol_h},
            {"tol_nh", report.params.tol_nh},
            {"sign_fraction", report.params.sign_fraction},
            {"mass_fraction", report.params.mass_fraction},
            {"min_support", report.params.min_support},
            {"sandwich_fraction", report.params.sandwich_fraction}}},
          {"mesh_relative", report.params.mesh_relative},
          {"ladder",
           {{"delta", report.params.delta},
            {"eps0", report.params.eps},
            {"lambda0", report.params.lambda},
            {"rungs", report.params.rungs},
            {"seed", report.params.seed}}}};
}

}  // namespace finslerkit
