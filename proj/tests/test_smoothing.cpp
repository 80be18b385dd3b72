#include "finslerkit/smoothing.hpp"
#include "finslerkit/test_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace finslerkit;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const SampledManifold& sphere1500() {
  static const SampledManifold g = sample_manifold(ManifoldSpec::sphere2(), 1500, {}, 1);
  return g;
}

const SampledManifold& square2000() {
  static const SampledManifold g = sample_manifold(ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2)), 2000, {}, 1);
  return g;
}

ScalarField north_distance(const SampledManifold& g) {
  return sample_test_function(g, nlohmann::json{{"name", "truncated_distance"}});
}

ScalarField cone(const SampledManifold& g) { return sample_test_function(g, nlohmann::json{{"name", "cone"}}); }

void expect_cover_invariants(const CoverData& c, const SampledManifold& g, double lip, double lambda) {
  EXPECT_LE((2 * c.r + c.r * c.r) * lip + c.r, lambda * (1 + 1e-12));
  for (const auto& ch : c.charts) EXPECT_LT(ch.radius, c.r);
  for (int i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c.n[i], static_cast<int>(c.adjacency[i].size()));
    for (int j : c.adjacency[i]) EXPECT_LE(c.n[i], c.m[j]) << i << " " << j;
  }
  ASSERT_EQ(static_cast<int>(c.sample_charts.size()), g.size());
  for (int s = 0; s < g.size(); ++s) {
    EXPECT_GE(c.sample_charts[s].size(), 1u) << s;
    EXPECT_LE(c.sample_charts[s].size(), 16u);
  }
}

std::shared_ptr<const CoverData> manual_cover(const ManifoldSpec& spec, std::vector<Vec> centers, double radius) {
  auto c = std::make_shared<CoverData>();
  c->r = radius;
  for (size_t i = 0; i < centers.size(); ++i) {
    c->charts.push_back(make_chart(spec, centers[i], radius, 1.0 + radius));
    c->centers.push_back(static_cast<int>(i));
  }
  return c;
}

}  // namespace

TEST(AdmissibleRadius, ZeroLipschitz) {
  const double r = admissible_radius(0.0, 0.2, 0.05);
  EXPECT_LE(r, 0.05);
  EXPECT_GT(r * std::pow(2.0, 1.0 / 8), 0.05);
  EXPECT_DOUBLE_EQ(admissible_radius(0.0, 0.2, 1.0), 0.1);
}

TEST(AdmissibleRadius, SatisfiesInequalityOnLattice) {
  for (double L : {0.5, 1.0, 3.0}) {
    const double r = admissible_radius(L, 0.4, 0.2);
    EXPECT_LE((2 * r + r * r) * L + r, 0.2);
    const double up = r * std::pow(2.0, 1.0 / 8);
    EXPECT_TRUE(up > 0.2 || (2 * up + up * up) * L + up > 0.2);
  }
}

TEST(BuildCover, SphereTruncatedDistanceInvariants) {
  const auto& g = sphere1500();
  const auto f = north_distance(g);
  const CoverData c = build_cover(g, f, 0.4, 0.2, 3);
  expect_cover_invariants(c, g, c.lip_f, 0.2);
}

TEST(BuildCover, SquareCoverage) {
  const auto& g = square2000();
  const CoverData c = build_cover(g, cone(g), 0.2, 0.1, 3);
  expect_cover_invariants(c, g, c.lip_f, 0.1);
}

TEST(BuildCover, ZeroFieldUsesLambdaOnlyRadius) {
  const auto& g = square2000();
  const auto zero = ScalarField::from_function(g, [](const Vec&) { return 0.0; });
  const CoverData c = build_cover(g, zero, 0.2, 0.05, 3);
  EXPECT_DOUBLE_EQ(c.r, admissible_radius(0.0, 0.2, 0.05));
}

TEST(BuildPartition, SumsToOneAndSupported) {
  const auto& g = sphere1500();
  auto cover = std::make_shared<const CoverData>(build_cover(g, north_distance(g), 0.4, 0.2, 3));
  const PartitionOfUnity pu = build_partition(cover, g);
  for (int s = 0; s < g.size(); ++s) {
    double total = 0.0;
    for (const auto& [i, w] : pu.at_sample(s)) {
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  for (int s = 0; s < g.size(); s += 11) {
    for (int i = 0; i < cover->size(); i += 3) {
      const double rho = cover->charts[i].radius;
      if (g.spec().distance(g.point(s), cover->charts[i].center) > rho * (1 + 1e-9)) EXPECT_EQ(pu.psi(i, g.point(s)), 0.0);
    }
  }
}

TEST(BuildPartition, SingleChartIsOne) {
  const auto spec = ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2));
  const PartitionOfUnity pu(spec, manual_cover(spec, {vec({0.5, 0.5})}, 0.9));
  PartitionOfUnity::Weights w;
  for (const auto& x : {vec({0.5, 0.5}), vec({0.1, 0.8}), vec({0.9, 0.2})}) {
    pu.weights(x, {0}, w);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_DOUBLE_EQ(w[0].second, 1.0);
  }
}

TEST(BuildPartition, TwoIdenticalChartsSplitEvenly) {
  const auto spec = ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2));
  const PartitionOfUnity pu(spec, manual_cover(spec, {vec({0.5, 0.5}), vec({0.5, 0.5})}, 0.3));
  PartitionOfUnity::Weights w;
  pu.weights(vec({0.5, 0.5}), {0, 1}, w);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_DOUBLE_EQ(w[0].second, 0.5);
  EXPECT_DOUBLE_EQ(w[1].second, 0.5);
}

TEST(Bump, ProfileValues) {
  EXPECT_DOUBLE_EQ(bump(0.0), 1.0);
  EXPECT_EQ(bump(1.0), 0.0);
  EXPECT_EQ(bump(-1.5), 0.0);
  EXPECT_NEAR(bump(0.5), std::exp(1.0 - 1.0 / 0.75), 1e-15);
}

TEST(Mollify, ConstantIsPreserved) {
  const auto g = mollify([](const Vec&) { return 2.5; }, 2, 6, 1.0 / 24);
  for (const auto& u : {vec({0, 0}), vec({0.013, -0.4}), vec({1.7, 2.2})}) EXPECT_NEAR(g(u), 2.5, 1e-13);
}

TEST(Mollify, LinearIsPreserved) {
  const Vec a = vec({0.7, -1.3});
  const auto g = mollify([a](const Vec& u) { return a.dot(u); }, 2, 10, 1.0 / 40);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Vec u = random_normal(rng, 2);
    EXPECT_NEAR(g(u), a.dot(u), 1e-6);
  }
}

TEST(Mollify, L1NormAtOriginMatchesDiscreteConvolution) {
  const int k = 10;
  const double h = 1.0 / (4 * k);
  const auto g = mollify([](const Vec& u) { return u.lpNorm<1>(); }, 2, k, h);
  // Independent discrete convolution at the origin.
  double num = 0.0, den = 0.0;
  for (int i = -4; i <= 4; ++i) {
    for (int j = -4; j <= 4; ++j) {
      const double x = i * h, y = j * h;
      const double w = mollifier_profile(std::hypot(x, y) * k);
      num += w * (std::abs(x) + std::abs(y));
      den += w;
    }
  }
  const double value = g(Vec::Zero(2));
  EXPECT_NEAR(value, num / den, 1e-14);
  EXPECT_GT(value, 0.0);
  EXPECT_LE(value, std::sqrt(2.0) / k);  // |u|_1 <= sqrt(2) |u|_2 <= sqrt(2)/k on the kernel support
}

TEST(Mollify, SupErrorAndNonexpansive) {
  const double L = 1.0;
  const int k = 8;
  auto f = [](const Vec& u) { return std::max(0.0, 0.5 - u.norm()); };
  const auto g = mollify(f, 2, k, 1.0 / (4 * k));
  const double h = g.grid_step();
  for (int i = -30; i <= 30; i += 3) {
    for (int j = -30; j <= 30; j += 3) {
      const Vec u = vec({i * h, j * h});
      EXPECT_LE(std::abs(g.node_value({i, j}) - f(u)), L / k + 1e-15);
      const double a = g.node_value({i, j}), b = g.node_value({i + 1, j}), c = g.node_value({i, j + 1});
      EXPECT_LE(std::abs(a - b), L * h * (1 + 1e-12));
      EXPECT_LE(std::abs(a - c), L * h * (1 + 1e-12));
    }
  }
}

TEST(Mollify, GridTooCoarseRejected) {
  EXPECT_THROW(mollify([](const Vec&) { return 0.0; }, 2, 4, 0.1), InputError);
}

TEST(SmoothApproximate, ZeroFunction) {
  const auto& g = square2000();
  const auto zero = ScalarField::from_function(g, [](const Vec&) { return 0.0; });
  const auto res = smooth_approximate(g, zero, 0.2, 0.05, 0.1, 1);
  for (int s = 0; s < g.size(); ++s) EXPECT_EQ(res.values[s], 0.0);
  EXPECT_TRUE(res.report.passed);
  std::ostringstream out;
  write_smoothing_csv(out, res.report);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,err_abs,lipa_g,lipf_ball,bound_ok,support_ok");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",true,true"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, g.size());
}

TEST(SmoothApproximate, ConeOnSquare) {
  const auto& g = square2000();
  const auto f = cone(g);
  const auto res = smooth_approximate(g, f, 0.2, 0.05, 0.1, 1);
  double worst = 0.0;
  for (int s = 0; s < g.size(); ++s) worst = std::max(worst, std::abs(res.values[s] - f[s]));
  EXPECT_LE(worst, 0.05);
  EXPECT_TRUE(res.report.err_pass);
  EXPECT_TRUE(res.report.support_pass);
  EXPECT_TRUE(res.report.lip_pass);
}

TEST(SmoothApproximate, SphereTruncatedDistanceLipBound) {
  const auto& g = sphere1500();
  const auto res = smooth_approximate(g, north_distance(g), 0.2, 0.05, 0.1, 1);
  EXPECT_GT(res.report.resolvable, 0);
  EXPECT_GE(res.report.lip_ok_fraction, 0.99);
  EXPECT_TRUE(res.report.passed);
}

TEST(SmoothingPlan, ScaleInequalitiesHoldExactly) {
  const auto& g = square2000();
  const auto res = smooth_approximate(g, cone(g), 0.2, 0.05, 0.1, 1, SmoothingOptions{.audit = false});
  const auto& plan = res.g.plan();
  const auto& cover = res.g.cover();
  const auto& lip_psi = res.g.partition().lipschitz();
  for (int i = 0; i < cover.size(); ++i) {
    const auto& cp = plan.charts[i];
    if (cp.constant) continue;
    const double C = cover.charts[i].equiv_constant;
    const double a = cp.extension_lipschitz * C / cp.k;
    EXPECT_DOUBLE_EQ(cp.extension_lipschitz, (1 + cover.r) * cp.lip_ball);
    EXPECT_LE(a, plan.eps);
    EXPECT_LE(lip_psi[i] * a, cover.r / cover.m[i]);
    EXPECT_LE(cp.grid_step, 1.0 / (4 * cp.k));
  }
}

TEST(SmoothedFunction, SingleActiveChartReproducesChartValue) {
  const auto& g = square2000();
  const auto res = smooth_approximate(g, cone(g), 0.2, 0.05, 0.1, 1, SmoothingOptions{.audit = false});
  int checked = 0;
  for (int s = 0; s < g.size(); ++s) {
    const auto& w = res.g.partition().at_sample(s);
    if (w.size() != 1 || w[0].second != 1.0) continue;
    const int i = w[0].first;
    const Vec u = to_chart(g.spec(), res.g.cover().charts[i], g.point(s));
    EXPECT_EQ(res.g.at_sample(s), res.g.chart_value(i, u));
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(SmoothApproximate, DeterministicCsv) {
  const auto& g = sphere1500();
  auto run = [&] {
    std::ostringstream out;
    write_smoothing_csv(out, smooth_approximate(g, north_distance(g), 0.2, 0.05, 0.1, 9).report);
    return out.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(SmoothApproximate, InvalidParameters) {
  const auto& g = square2000();
  EXPECT_THROW(smooth_approximate(g, cone(g), 0.2, 0.0, 0.1, 1), InputError);
  EXPECT_THROW(smooth_approximate(g, cone(g), -1.0, 0.05, 0.1, 1), InputError);
}
