#include "finslerkit/manifold.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace finslerkit;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Great-circle point at angle t from x along the unit tangent u.
Vec great_circle(const Vec& x, const Vec& u, double t) { return std::cos(t) * x + std::sin(t) * u; }

}  // namespace

TEST(GeodesicShoot, EuclideanStraightLine) {
  const auto spec = ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2)).with_domain(-5, 5);
  const Vec y = geodesic_shoot(spec, vec({0, 0}), vec({1, 2}), 1.0);
  EXPECT_NEAR((y - vec({1, 2})).norm(), 0.0, 1e-12);
}

TEST(GeodesicShoot, SphereNorthPoleToEquator) {
  const auto spec = ManifoldSpec::sphere2();
  const Vec y = geodesic_shoot(spec, vec({0, 0, 1}), vec({1, 0, 0}), kPi / 2);
  EXPECT_NEAR(y[2], 0.0, 1e-6);
  EXPECT_NEAR(y.norm(), 1.0, 1e-9);
}

TEST(GeodesicShoot, TorusWraps) {
  const auto spec = ManifoldSpec::flat_torus2();
  const Vec y = geodesic_shoot(spec, vec({0.9, 0}), vec({1, 0}), 0.2);
  EXPECT_NEAR(y[0], 0.1, 1e-12);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
}

TEST(ExpMap, EuclideanIsTranslation) {
  const auto spec = ManifoldSpec::euclidean(MinkowskiNorm::lp(2, 4.0)).with_domain(-5, 5);
  const Vec x = vec({0.3, -0.2}), v = vec({0.5, 0.25});
  EXPECT_NEAR((exp_map(spec, x, v) - (x + v)).norm(), 0.0, 1e-12);
}

TEST(ExpMap, ZeroVectorIsIdentity) {
  EXPECT_NEAR((exp_map(ManifoldSpec::sphere2(), vec({0, 0.6, 0.8}), Vec::Zero(3)) - vec({0, 0.6, 0.8})).norm(), 0, 1e-14);
  EXPECT_NEAR((exp_map(ManifoldSpec::flat_torus2(), vec({0.2, 0.7}), Vec::Zero(2)) - vec({0.2, 0.7})).norm(), 0, 1e-14);
  EXPECT_NEAR((exp_map(ManifoldSpec::finsler_plane(), vec({0.2, 0.7}), Vec::Zero(2)) - vec({0.2, 0.7})).norm(), 0, 1e-14);
}

TEST(ExpMap, SphereAntipode) {
  const Vec y = exp_map(ManifoldSpec::sphere2(), vec({0, 0, 1}), vec({kPi, 0, 0}), 256);
  EXPECT_NEAR((y - vec({0, 0, -1})).norm(), 0.0, 1e-5);
  EXPECT_NEAR((sphere_exp(1.0, vec({0, 0, 1}), vec({kPi, 0, 0})) - vec({0, 0, -1})).norm(), 0.0, 1e-12);
}

TEST(ExpMap, AgreesWithScaledShoot) {
  const auto spec = ManifoldSpec::finsler_plane();
  const Vec x = vec({0.4, 0.5}), v = vec({0.3, -0.2});
  for (double t : {0.25, 0.5, 1.0})
    EXPECT_NEAR((exp_map(spec, x, t * v, 128) - geodesic_shoot(spec, x, v, t, 128)).norm(), 0.0, 1e-8);
}

TEST(ExpMap, SphereFourthOrderConvergence) {
  const Vec x = vec({0, 0, 1}), v = vec({1.2, 0.9, 0});
  const Vec exact = sphere_exp(1.0, x, v);
  const double e1 = (geodesic_shoot(ManifoldSpec::sphere2(), x, v, 1.0, 16) - exact).norm();
  const double e2 = (geodesic_shoot(ManifoldSpec::sphere2(), x, v, 1.0, 32) - exact).norm();
  EXPECT_GE(e1 / e2, 8.0);
}

TEST(Geodesic, SpeedConservation) {
  struct Case {
    ManifoldSpec spec;
    Vec x, v;
    double tol;
  };
  const std::vector<Case> cases = {
      {ManifoldSpec::sphere2(), vec({0, 0.6, 0.8}), vec({1, 0.2, -0.15}), 1e-4},
      {ManifoldSpec::flat_torus2(vec({1, 2}), (Mat(2, 2) << 1.5, 0.2, 0.2, 0.8).finished()), vec({0.3, 0.4}),
       vec({0.7, -0.4}), 1e-4},
      {ManifoldSpec::finsler_plane(), vec({0.2, 0.1}), vec({0.5, 0.3}), 1e-3},
  };
  for (const auto& c : cases) {
    const auto path = integrate_geodesic(c.spec, c.x, c.v, 1.0, 128);
    const double s0 = c.spec.speed(path.front().position, path.front().velocity);
    for (const auto& st : path) EXPECT_NEAR(c.spec.speed(st.position, st.velocity), s0, c.tol * s0) << to_string(c.spec.kind());
  }
}

TEST(Manifold, MetricFieldIsSymmetricPositiveDefinite) {
  const auto torus = ManifoldSpec::flat_torus2(vec({1, 1}), (Mat(2, 2) << 2, 0.5, 0.5, 1).finished());
  for (const auto& x : {vec({0.1, 0.2}), vec({0.8, 0.5})}) {
    const Mat g = torus.metric_at(x);
    EXPECT_NEAR((g - g.transpose()).norm(), 0.0, 1e-15);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Manifold, FinslerPlaneFibersAreMinkowski) {
  const auto spec = ManifoldSpec::finsler_plane();
  for (const auto& x : {vec({0, 0}), vec({0.5, 0.5}), vec({0.9, 0.1})})
    EXPECT_TRUE(validate_minkowski(spec.norm_at(x), 300, 1).passed);
}

TEST(Manifold, EquivalenceConstantBoundsNorm) {
  Rng rng(2);
  for (const auto& F : {MinkowskiNorm::quartic_blend(2, 0.8), MinkowskiNorm::lp(3, 4.0),
                        MinkowskiNorm::euclidean((Mat(2, 2) << 4, 1, 1, 0.5).finished())}) {
    const double C = equivalence_constant(F);
    for (int i = 0; i < 500; ++i) {
      const Vec v = random_normal(rng, F.dim());
      EXPECT_LE(F(v) / C, v.norm() * (1 + 1e-9));
      EXPECT_LE(v.norm(), C * F(v) * (1 + 1e-9));
    }
  }
}

TEST(BilipschitzRadius, EuclideanIsGlobalIsometry) {
  const auto spec = ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2));
  const auto res = bilipschitz_radius(spec, vec({0.5, 0.5}), 0.01, 64, 3);
  EXPECT_DOUBLE_EQ(res.radius, spec.injectivity_hint());
  EXPECT_NEAR(res.measured_distortion, 1.0, 1e-9);
}

TEST(BilipschitzRadius, SphereCertifiedAndOutOfSample) {
  const auto spec = ManifoldSpec::sphere2();
  const Vec x = vec({0.6, 0, 0.8});
  const auto res = bilipschitz_radius(spec, x, 0.1, 128, 5);
  EXPECT_GT(res.radius, 0.0);
  EXPECT_LE(res.measured_distortion, 1.1);
  // Closed-form cross-check: chart distances are great-circle arcs, so the
  // distortion of the exponential chart is known on fresh pairs.
  EXPECT_LE(measure_chart_distortion(spec, x, res.radius, 256, 99), 1.1);
}

TEST(BilipschitzRadius, MonotoneInEps) {
  for (const auto& spec : {ManifoldSpec::sphere2(), ManifoldSpec::finsler_plane()}) {
    const Vec x = spec.kind() == ManifoldKind::sphere2 ? vec({0, 0, 1}) : vec({0.5, 0.5});
    const double a = bilipschitz_radius(spec, x, 0.05, 64, 7).radius;
    const double b = bilipschitz_radius(spec, x, 0.2, 64, 7).radius;
    EXPECT_LE(a, b);
  }
}

TEST(Chart, RoundTripAndDistortion) {
  const auto spec = ManifoldSpec::sphere2();
  const Vec c = vec({0, 0.6, 0.8});
  const ChartData chart = make_chart(spec, c, 0.3, 1.1);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    Vec u = random_normal(rng, 2);
    u *= 0.25 * random_uniform(rng, 0.0, 1.0) / u.norm();
    const Vec x = from_chart(spec, chart, u);
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
    EXPECT_NEAR((to_chart(spec, chart, x) - u).norm(), 0.0, 1e-10);
    // Radial distances are exact in a normal chart.
    EXPECT_NEAR(spec.distance(c, x), chart.chart_norm(u), 1e-10);
  }
}

TEST(Chart, GreatCircleOracle) {
  const Vec x = vec({1, 0, 0}), u = vec({0, 0, 1});
  for (double t : {0.1, 1.0, 2.5}) {
    EXPECT_NEAR((sphere_exp(1.0, x, t * u) - great_circle(x, u, t)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((sphere_log(1.0, x, great_circle(x, u, t)) - t * u).norm(), 0.0, 1e-10);
  }
}

TEST(ManifoldJson, RoundTripAndErrors) {
  for (const auto& spec : {ManifoldSpec::sphere2(2.0), ManifoldSpec::flat_torus2(), ManifoldSpec::finsler_plane(),
                           ManifoldSpec::euclidean(MinkowskiNorm::lp(2, 4.0))})
    EXPECT_TRUE(manifold_from_json(to_json(spec)) == spec) << to_string(spec.kind());
  EXPECT_THROW(manifold_from_json(nlohmann::json{{"radius", 1}}), InputError);
  EXPECT_THROW(manifold_from_json(nlohmann::json{{"kind", "klein_bottle"}}), InputError);
}
