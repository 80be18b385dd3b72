#include "finslerkit/sobolev.hpp"
#include "finslerkit/test_functions.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace finslerkit;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const SampledManifold& l4_plane() {
  static const SampledManifold g = sample_manifold(ManifoldSpec::euclidean(MinkowskiNorm::lp(2, 4.0)), 400, {}, 7);
  return g;
}

const SampledManifold& sphere400() {
  static const SampledManifold g = sample_manifold(ManifoldSpec::sphere2(), 400, {}, 7);
  return g;
}

ScalarField coord(const SampledManifold& g, int i) {
  return sample_test_function(g, nlohmann::json{{"name", "coordinate"}, {"index", i}});
}

HilbertParams mesh_params() {
  HilbertParams p;
  p.mesh_relative = true;
  p.lambda = 0.2;
  p.eps = 0.05;
  return p;
}

const HilbertianityReport& l4_report() {
  static const HilbertianityReport r =
      hilbertianity_check(l4_plane(), l4_plane().measure(), coord(l4_plane(), 0), coord(l4_plane(), 1), mesh_params());
  return r;
}

}  // namespace

TEST(PointwiseDifferential, LinearFunction) {
  const auto& g = l4_plane();
  const Vec a = vec({0.7, -0.4});
  const ScalarField::Function f = [a](const Vec& x) { return a.dot(x); };
  for (int s : {0, 17, 123}) EXPECT_NEAR((pointwise_differential(f, g, s) - a).norm(), 0.0, 1e-9);
}

TEST(PointwiseDifferential, ConstantFunction) {
  const ScalarField::Function f = [](const Vec&) { return 4.0; };
  EXPECT_NEAR(pointwise_differential(f, sphere400(), 5).norm(), 0.0, 1e-12);
}

TEST(PointwiseDifferential, HalfSquare) {
  const auto& g = l4_plane();
  const auto f = make_test_function("half_square", g.spec());
  for (int s : {3, 50, 200}) EXPECT_NEAR((pointwise_differential(f, g, s) - g.point(s)).norm(), 0.0, 1e-8);
}

TEST(PointwiseDifferential, SphereHeightHasTangentialGradient) {
  const auto& g = sphere400();
  const auto f = make_test_function(nlohmann::json{{"name", "coordinate"}, {"index", 2}}, g.spec());
  for (int s : {1, 99, 250}) {
    const double z = g.point(s)[2];
    EXPECT_NEAR(pointwise_differential(f, g, s).norm(), std::sqrt(1 - z * z), 1e-7);
  }
}

TEST(Pairing, CauchySchwarz) {
  const auto& g = l4_plane();
  Rng rng(3);
  std::vector<Vec> w, v;
  for (int s = 0; s < g.size(); ++s) {
    w.push_back(random_normal(rng, 2));
    v.push_back(random_normal(rng, 2));
  }
  const auto omega = make_covector_field(g, w);
  const auto vf = make_vector_field(g, v);
  const auto p = pairing(omega, vf);
  for (int s = 0; s < g.size(); ++s) {
    EXPECT_NEAR(p[s], w[s].dot(v[s]), 1e-14);
    EXPECT_LE(std::abs(p[s]), omega.norms[s] * vf.norms[s] * (1 + 1e-9));
  }
  // Holder pair (4, 4/3) closed form.
  EXPECT_NEAR(omega.norms[0], std::pow(std::pow(std::abs(w[0][0]), 4.0 / 3) + std::pow(std::abs(w[0][1]), 4.0 / 3), 0.75), 1e-6);
}

TEST(WugEstimate, ConstantIsZero) {
  const auto& g = sphere400();
  const auto f = ScalarField::from_function(g, [](const Vec&) { return 1.5; });
  const auto w = wug_estimate(f, g, 0.4, 0.05, 0.2, 1);
  for (double x : w.values) EXPECT_EQ(x, 0.0);
}

TEST(WugEstimate, LinearOnL4MatchesDualNorm) {
  const auto& g = l4_plane();
  const Vec a = vec({1.0, 0.5});
  const double dual = std::pow(std::pow(1.0, 4.0 / 3) + std::pow(0.5, 4.0 / 3), 0.75);
  const auto f = ScalarField::from_function(g, [a](const Vec& x) { return a.dot(x); });
  const HilbertParams p = mesh_params();
  const auto w = wug_estimate(f, g, p.delta, p.eps_for(g), p.lambda_for(g), 1);
  for (int s = 0; s < g.size(); ++s) EXPECT_NEAR(w.values[s], dual, 0.02 * dual) << s;
}

TEST(WugEstimate, MinimumOverRungs) {
  const auto& g = sphere400();
  const auto f = coord(g, 0);
  const auto w = wug_estimate(f, g, 0.4, 0.05, 0.2, 1, 3);
  ASSERT_EQ(w.per_rung.size(), 3u);
  for (int s = 0; s < g.size(); ++s) {
    const double two = std::min(w.per_rung[0][s], w.per_rung[1][s]);
    EXPECT_LE(w.values[s], two);
    EXPECT_LE(w.values[s], w.per_rung[2][s]);
    EXPECT_EQ(w.values[s], std::min(two, w.per_rung[2][s]));
  }
}

TEST(WugLadder, HalvingRungs) {
  const auto ladder = build_wug_ladder(sphere400(), 0.4, 0.05, 0.2, 1, 3);
  ASSERT_EQ(ladder.rungs(), 3);
  for (int j = 1; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(ladder.eps[j], ladder.eps[j - 1] / 2);
    EXPECT_DOUBLE_EQ(ladder.lambda[j], ladder.lambda[j - 1] / 2);
  }
  EXPECT_GE(ladder.max_r(), ladder.partitions.back()->cover().r);
}

TEST(Hilbertianity, L4CoordinatesDefect) {
  const auto& r = l4_report();
  // W(x) = 1, W(y) = 1, W(x +- y) = 2^(3/4) for the dual exponent 4/3.
  const double d = 2 * std::pow(2.0, 1.5) - 4.0;
  for (int s = 0; s < static_cast<int>(r.defect.size()); s += 37) EXPECT_NEAR(r.defect[s], d, 0.02 * d);
  EXPECT_NEAR(r.relative, d / 4.0, 0.01);
  EXPECT_EQ(r.verdict, HilbertVerdict::non_hilbertian);
  EXPECT_FALSE(r.riemannian);
}

TEST(Hilbertianity, SphereIsHilbertian) {
  const auto& g = sphere400();
  const auto r = hilbertianity_check(g, g.measure(), coord(g, 0), coord(g, 1), mesh_params());
  EXPECT_LT(r.relative, 0.02);
  EXPECT_EQ(r.verdict, HilbertVerdict::hilbertian_within_tol);
  EXPECT_TRUE(r.riemannian);
  EXPECT_TRUE(r.sandwich_pass);
}

TEST(Hilbertianity, EqualFunctionsHaveZeroDefect) {
  const auto& g = l4_plane();
  const auto f = coord(g, 0);
  const auto r = hilbertianity_check(g, g.measure(), f, f, mesh_params());
  for (double d : r.defect) EXPECT_NEAR(d, 0.0, 1e-9);
}

TEST(Hilbertianity, QuadraticScaling) {
  const auto& g = l4_plane();
  const auto f = coord(g, 0), h = coord(g, 1);
  const auto r = hilbertianity_check(g, g.measure(), 3.0 * f, 3.0 * h, mesh_params());
  EXPECT_NEAR(r.integrated_abs, 9.0 * l4_report().integrated_abs, 1e-6 * r.integrated_abs);
  EXPECT_NEAR(r.relative, l4_report().relative, 1e-9);
}

TEST(Hilbertianity, FewAtomsAreInconclusive) {
  const int n = 100;
  WeightedMeasure mu;
  mu.weights.assign(n, 0.0);
  mu.weights[3] = mu.weights[40] = mu.weights[77] = 1.0;
  mu.total_mass = 3.0;
  const std::vector<double> ones(n, 1.0), sum(n, std::sqrt(2.0)), diff(n, std::sqrt(2.0));
  const auto r = hilbertianity_from_wug(mu, ones, ones, sum, diff, true, 0.0, HilbertParams{});
  EXPECT_EQ(r.verdict, HilbertVerdict::inconclusive);
  EXPECT_EQ(r.support_count, 3);
}

TEST(Hilbertianity, SyntheticVerdicts) {
  const int n = 200;
  WeightedMeasure mu;
  mu.weights.assign(n, 1.0 / n);
  mu.total_mass = 1.0;
  const std::vector<double> ones(n, 1.0), flat(n, std::sqrt(2.0)), bent(n, std::pow(2.0, 0.75));
  EXPECT_EQ(hilbertianity_from_wug(mu, ones, ones, flat, flat, true, 0.0, {}).verdict,
            HilbertVerdict::hilbertian_within_tol);
  EXPECT_EQ(hilbertianity_from_wug(mu, ones, ones, bent, bent, false, 0.0, {}).verdict,
            HilbertVerdict::non_hilbertian);
}

TEST(Hilbertianity, CsvHeaderAndRows) {
  std::ostringstream out;
  write_hilbert_csv(out, l4_report());
  const std::string text = out.str();
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,weight,W_f,W_g,W_sum,W_diff,defect");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, l4_plane().size());
  EXPECT_EQ(to_json(l4_report())["verdict"], "non_hilbertian");
}

TEST(HilbertParams, MeshRelativeScales) {
  const auto& g = sphere400();
  HilbertParams p = mesh_params();
  EXPECT_DOUBLE_EQ(p.lambda_for(g), 0.2 * g.median_edge_length());
  p.mesh_relative = false;
  EXPECT_DOUBLE_EQ(p.eps_for(g), 0.05);
}
