#include "finslerkit/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace finslerkit {

namespace {

Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

double wrap_centered(double d, double period) {
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d <= -0.5 * period) d += period;
  return d;
}

// Frame orthonormal for the metric G: I^T G I = Id with I = L^{-T}, G = L L^T.
Mat orthonormal_frame(const Mat& gram) {
  const Mat lower = gram.llt().matrixL();
  return lower.transpose().inverse();
}

Vec wrapped_torus_displacement(const ManifoldSpec& spec, const Vec& x, const Vec& y) {
  Vec d = y - x;
  for (int i = 0; i < 2; ++i) d[i] = wrap_centered(d[i], spec.periods()[i]);
  // A skewed metric can make a neighboring lattice image shorter.
  const Mat& g = spec.torus_metric();
  Vec best = d;
  double best_len = d.dot(g * d);
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      Vec c = d;
      c[0] += a * spec.periods()[0];
      c[1] += b * spec.periods()[1];
      const double len = c.dot(g * c);
      if (len < best_len - 1e-15) {
        best_len = len;
        best = c;
      }
    }
  }
  return best;
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::euclidean: return "euclidean";
    case ManifoldKind::sphere2: return "sphere2";
    case ManifoldKind::flat_torus2: return "flat_torus2";
    case ManifoldKind::finsler_plane: return "finsler_plane";
  }
  return "unknown";
}

ManifoldSpec ManifoldSpec::euclidean(const MinkowskiNorm& norm) {
  if (!norm.reversible()) throw InputError("euclidean manifold: norm must be reversible");
  ManifoldSpec s;
  s.kind_ = ManifoldKind::euclidean;
  s.intrinsic_dim_ = norm.dim();
  s.norm_ = norm;
  return s;
}

ManifoldSpec ManifoldSpec::sphere2(double radius) {
  if (!(radius > 0.0)) throw InputError("sphere2: radius must be positive");
  ManifoldSpec s;
  s.kind_ = ManifoldKind::sphere2;
  s.intrinsic_dim_ = 2;
  s.radius_ = radius;
  return s;
}

ManifoldSpec ManifoldSpec::flat_torus2(const Vec& periods, const Mat& metric) {
  if (periods.size() != 2 || (periods.array() <= 0.0).any()) throw InputError("flat_torus2: two positive periods required");
  if (metric.rows() != 2 || metric.cols() != 2) throw InputError("flat_torus2: metric must be 2x2");
  if (std::abs(metric(0, 1) - metric(1, 0)) > 1e-14 || metric.llt().info() != Eigen::Success) {
    throw InputError("flat_torus2: metric must be symmetric positive definite");
  }
  ManifoldSpec s;
  s.kind_ = ManifoldKind::flat_torus2;
  s.intrinsic_dim_ = 2;
  s.periods_ = periods;
  s.metric_ = metric;
  return s;
}

ManifoldSpec ManifoldSpec::flat_torus2() { return flat_torus2(Vec::Ones(2), Mat::Identity(2, 2)); }

ManifoldSpec ManifoldSpec::finsler_plane(const FinslerPlaneField& field) {
  if (field.base.dim() != 2 || !field.base.reversible()) throw InputError("finsler_plane: base norm must be reversible, dim 2");
  if (!(field.conformal_amplitude > -1.0)) throw InputError("finsler_plane: conformal_amplitude must exceed -1");
  ManifoldSpec s;
  s.kind_ = ManifoldKind::finsler_plane;
  s.intrinsic_dim_ = 2;
  s.field_ = field;
  s.domain_lo_ = -1.0;
  s.domain_hi_ = 1.0;
  return s;
}

ManifoldSpec ManifoldSpec::with_domain(double lo, double hi) const {
  if (!(hi > lo)) throw InputError("with_domain: empty domain");
  ManifoldSpec s = *this;
  s.domain_lo_ = lo;
  s.domain_hi_ = hi;
  return s;
}

bool ManifoldSpec::is_riemannian() const {
  switch (kind_) {
    case ManifoldKind::euclidean: return norm_.is_inner_product();
    case ManifoldKind::sphere2:
    case ManifoldKind::flat_torus2: return true;
    case ManifoldKind::finsler_plane: return field_.base.is_inner_product();
  }
  return false;
}

MinkowskiNorm ManifoldSpec::norm_at(const Vec& x) const {
  switch (kind_) {
    case ManifoldKind::euclidean: return norm_;
    case ManifoldKind::sphere2: return MinkowskiNorm::euclidean(2);
    case ManifoldKind::flat_torus2: return MinkowskiNorm::euclidean(metric_);
    case ManifoldKind::finsler_plane: {
      const double c = 1.0 + field_.conformal_amplitude * std::exp(-x.squaredNorm());
      return field_.base.transformed(rotation2(field_.rotation_rate * x[0]), c);
    }
  }
  return norm_;
}

double ManifoldSpec::speed(const Vec& x, const Vec& v) const {
  if (kind_ == ManifoldKind::sphere2) {
    const Vec n = x / x.norm();
    return (v - v.dot(n) * n).norm();
  }
  return norm_at(x)(v);
}

Mat ManifoldSpec::metric_at(const Vec& x) const {
  switch (kind_) {
    case ManifoldKind::flat_torus2: return metric_;
    case ManifoldKind::euclidean:
      if (norm_.is_inner_product()) {
        const Mat& f = norm_.frame();
        const double s2 = norm_.scale() * norm_.scale();
        return f.size() == 0 ? Mat(s2 * norm_.gram()) : Mat(s2 * f.transpose() * norm_.gram() * f);
      }
      break;
    default: break;
  }
  (void)x;
  throw InputError("metric_at: " + to_string(kind_) + " has no coordinate metric tensor");
}

Mat ManifoldSpec::tangent_frame(const Vec& x) const {
  switch (kind_) {
    case ManifoldKind::sphere2: {
      const Eigen::Vector3d n = Eigen::Vector3d(x[0], x[1], x[2]).normalized();
      Eigen::Vector3d a = std::abs(n.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
      const Eigen::Vector3d e1 = (a - a.dot(n) * n).normalized();
      const Eigen::Vector3d e2 = n.cross(e1);
      Mat f(3, 2);
      f.col(0) = e1;
      f.col(1) = e2;
      return f;
    }
    case ManifoldKind::flat_torus2: return orthonormal_frame(metric_);
    case ManifoldKind::euclidean:
      if (norm_.is_inner_product()) return orthonormal_frame(metric_at(x));
      return Mat::Identity(intrinsic_dim_, intrinsic_dim_);
    case ManifoldKind::finsler_plane: return Mat::Identity(2, 2);
  }
  return Mat::Identity(intrinsic_dim_, intrinsic_dim_);
}

Vec ManifoldSpec::normalize_point(const Vec& x) const {
  if (kind_ == ManifoldKind::sphere2) return radius_ * x / x.norm();
  if (kind_ == ManifoldKind::flat_torus2) {
    Vec y = x;
    for (int i = 0; i < 2; ++i) {
      y[i] = std::fmod(y[i], periods_[i]);
      if (y[i] < 0.0) y[i] += periods_[i];
      if (y[i] >= periods_[i]) y[i] -= periods_[i];
    }
    return y;
  }
  return x;
}

bool ManifoldSpec::contains(const Vec& x, double tol) const {
  if (x.size() != ambient_dim() || !x.allFinite()) return false;
  if (kind_ == ManifoldKind::sphere2) return std::abs(x.norm() - radius_) <= tol * radius_;
  return true;
}

Vec ManifoldSpec::displacement(const Vec& x, const Vec& y) const {
  switch (kind_) {
    case ManifoldKind::sphere2: return sphere_log(radius_, x, y);
    case ManifoldKind::flat_torus2: return wrapped_torus_displacement(*this, x, y);
    default: return y - x;
  }
}

double ManifoldSpec::segment_length(const Vec& x, const Vec& y) const {
  switch (kind_) {
    case ManifoldKind::sphere2: return sphere_log(radius_, x, y).norm();
    case ManifoldKind::flat_torus2: {
      const Vec d = wrapped_torus_displacement(*this, x, y);
      return std::sqrt(d.dot(metric_ * d));
    }
    case ManifoldKind::euclidean: return norm_(y - x);
    case ManifoldKind::finsler_plane: {
      const Vec d = y - x;
      constexpr int kNodes = 8;
      double acc = 0.0;
      for (int j = 0; j < kNodes; ++j) {
        const double t = (j + 0.5) / kNodes;
        acc += norm_at(x + t * d)(d);
      }
      return acc / kNodes;
    }
  }
  return 0.0;
}

double ManifoldSpec::distance(const Vec& x, const Vec& y) const { return segment_length(x, y); }

double ManifoldSpec::coordinate_distance(const Vec& x, const Vec& y) const {
  if (kind_ == ManifoldKind::flat_torus2) {
    const Vec d = wrapped_torus_displacement(*this, x, y);
    return std::sqrt(d.dot(metric_ * d));
  }
  return (y - x).norm();
}

double ManifoldSpec::injectivity_hint() const {
  switch (kind_) {
    case ManifoldKind::euclidean: return domain_hi_ - domain_lo_;
    case ManifoldKind::sphere2: return 0.5 * std::numbers::pi * radius_;
    case ManifoldKind::flat_torus2: {
      Eigen::SelfAdjointEigenSolver<Mat> eig(metric_);
      return 0.25 * periods_.minCoeff() * std::sqrt(eig.eigenvalues().minCoeff());
    }
    case ManifoldKind::finsler_plane: return 0.25 * (domain_hi_ - domain_lo_);
  }
  return 1.0;
}

double ManifoldSpec::total_area() const {
  switch (kind_) {
    case ManifoldKind::sphere2: return 4.0 * std::numbers::pi * radius_ * radius_;
    case ManifoldKind::flat_torus2: return periods_[0] * periods_[1] * std::sqrt(metric_.determinant());
    default: return std::pow(domain_hi_ - domain_lo_, intrinsic_dim_);
  }
}

bool operator==(const ManifoldSpec& a, const ManifoldSpec& b) {
  return a.kind_ == b.kind_ && a.intrinsic_dim_ == b.intrinsic_dim_ && a.norm_ == b.norm_ && a.radius_ == b.radius_ &&
         a.periods_ == b.periods_ && a.metric_ == b.metric_ && a.field_.base == b.field_.base &&
         a.field_.conformal_amplitude == b.field_.conformal_amplitude &&
         a.field_.rotation_rate == b.field_.rotation_rate && a.domain_lo_ == b.domain_lo_ &&
         a.domain_hi_ == b.domain_hi_;
}

Vec sphere_exp(double radius, const Vec& x, const Vec& v) {
  const Vec n = x / x.norm();
  const Vec t = v - v.dot(n) * n;
  const double len = t.norm();
  if (len == 0.0) return radius * n;
  const double angle = len / radius;
  return radius * (std::cos(angle) * n + std::sin(angle) * t / len);
}

Vec sphere_log(double radius, const Vec& x, const Vec& y) {
  const Eigen::Vector3d a = Eigen::Vector3d(x[0], x[1], x[2]).normalized();
  const Eigen::Vector3d b = Eigen::Vector3d(y[0], y[1], y[2]).normalized();
  const double sin_angle = a.cross(b).norm();
  const double cos_angle = a.dot(b);
  const double angle = std::atan2(sin_angle, cos_angle);
  Eigen::Vector3d w = b - cos_angle * a;
  const double len = w.norm();
  if (len < 1e-300) return Vec::Zero(3);
  w *= radius * angle / len;
  return Vec(w);
}

namespace {

// Geodesic acceleration for the given kind.
Vec geodesic_acceleration(const ManifoldSpec& spec, const Vec& x, const Vec& v) {
  const int n = spec.intrinsic_dim();
  if (spec.kind() == ManifoldKind::sphere2) {
    // Constraint force keeping the curve on the sphere: x'' = -|x'|^2 x / |x|^2.
    return -(v.squaredNorm() / x.squaredNorm()) * x;
  }
  const bool coordinate_riemannian =
      spec.kind() == ManifoldKind::flat_torus2 ||
      (spec.kind() == ManifoldKind::euclidean && spec.euclidean_norm().is_inner_product());
  if (coordinate_riemannian) {
    // Christoffel symbols from central differences of the metric entries.
    constexpr double h = 1e-5;
    std::vector<Mat> dg(n);
    for (int l = 0; l < n; ++l) {
      Vec e = Vec::Zero(n);
      e[l] = h;
      dg[l] = (spec.metric_at(x + e) - spec.metric_at(x - e)) / (2.0 * h);
    }
    const Mat ginv = spec.metric_at(x).inverse();
    Vec a = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double gamma = 0.0;
          for (int l = 0; l < n; ++l) {
            gamma += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          }
          acc += gamma * v[i] * v[j];
        }
      }
      a[k] = -acc;
    }
    return a;
  }
  // Euler-Lagrange equations of L(x, v) = F(x, v)^2 / 2:
  //   H x'' = dL/dx - (d^2L/dv dx) v,   H = d^2L/dv^2.
  constexpr double h = 1e-5;
  const MinkowskiNorm here = spec.norm_at(x);
  const Mat hess = here.half_square_hessian(v);
  Vec dl_dx(n);
  Mat mixed(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e[j] = h;
    const MinkowskiNorm plus = spec.norm_at(x + e);
    const MinkowskiNorm minus = spec.norm_at(x - e);
    const double fp = plus(v), fm = minus(v);
    dl_dx[j] = (0.5 * fp * fp - 0.5 * fm * fm) / (2.0 * h);
    mixed.col(j) = (plus.half_square_gradient(v) - minus.half_square_gradient(v)) / (2.0 * h);
  }
  return hess.ldlt().solve(dl_dx - mixed * v);
}

}  // namespace

std::vector<GeodesicState> integrate_geodesic(const ManifoldSpec& spec, const Vec& x, const Vec& v, double t,
                                              int steps) {
  if (steps < 16) throw InputError("geodesic_shoot: steps must be >= 16");
  if (!spec.contains(x)) throw InputError("geodesic_shoot: point is not on the manifold");
  if (v.size() != spec.ambient_dim()) throw InputError("geodesic_shoot: tangent vector has wrong dimension");
  Vec vel = v;
  if (spec.kind() == ManifoldKind::sphere2) vel -= vel.dot(x) / x.squaredNorm() * x;

  std::vector<GeodesicState> path;
  path.reserve(steps + 1);
  path.push_back({x, vel});
  if (vel.norm() == 0.0 || t == 0.0) {
    for (int s = 0; s < steps; ++s) path.push_back({spec.normalize_point(x), vel});
    path.back().position = spec.normalize_point(x);
    return path;
  }
  const double dt = t / steps;
  const double bound = 1e6 * (1.0 + x.norm() + std::abs(t) * vel.norm());
  Vec pos = x;
  for (int s = 0; s < steps; ++s) {
    const Vec k1x = vel;
    const Vec k1v = geodesic_acceleration(spec, pos, vel);
    const Vec k2x = vel + 0.5 * dt * k1v;
    const Vec k2v = geodesic_acceleration(spec, pos + 0.5 * dt * k1x, k2x);
    const Vec k3x = vel + 0.5 * dt * k2v;
    const Vec k3v = geodesic_acceleration(spec, pos + 0.5 * dt * k2x, k3x);
    const Vec k4x = vel + dt * k3v;
    const Vec k4v = geodesic_acceleration(spec, pos + dt * k3x, k4x);
    const Vec step_x = dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    const Vec step_v = dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!step_x.allFinite() || !step_v.allFinite() || step_x.norm() > bound || step_v.norm() > bound) {
      throw NumericError("geodesic_shoot: integration blow-up at step " + std::to_string(s));
    }
    pos += step_x;
    vel += step_v;
    path.push_back({pos, vel});
  }
  for (auto& state : path) state.position = spec.normalize_point(state.position);
  return path;
}

Vec geodesic_shoot(const ManifoldSpec& spec, const Vec& x, const Vec& v, double t, int steps) {
  return integrate_geodesic(spec, x, v, t, steps).back().position;
}

Vec exp_map(const ManifoldSpec& spec, const Vec& x, const Vec& v, int steps) {
  return geodesic_shoot(spec, x, v, 1.0, steps);
}

double equivalence_constant(const MinkowskiNorm& norm) {
  const int n = norm.dim();
  if (norm.is_inner_product()) {
    const Mat& f = norm.frame();
    const double s2 = norm.scale() * norm.scale();
    const Mat q = f.size() == 0 ? Mat(s2 * norm.gram()) : Mat(s2 * f.transpose() * norm.gram() * f);
    Eigen::SelfAdjointEigenSolver<Mat> eig(q);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw InputError("equivalence_constant: norm is not positive definite");
    return std::max({1.0, std::sqrt(hi), 1.0 / std::sqrt(lo)});
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  auto visit = [&](const Vec& u) {
    const double f = norm(u);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  };
  if (n == 1) {
    visit(Vec::Ones(1));
    visit(-Vec::Ones(1));
  } else if (n == 2) {
    constexpr int kCount = 8192;
    for (int j = 0; j < kCount; ++j) {
      const double a = 2.0 * std::numbers::pi * j / kCount;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      visit(u);
    }
  } else {
    Rng rng(0xc0ffeeULL);
    for (int j = 0; j < 20000; ++j) {
      Vec u = random_normal(rng, n);
      visit(u / u.norm());
    }
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e[i] = 1.0;
      visit(e);
    }
  }
  if (!(lo > 0.0)) throw InputError("equivalence_constant: norm is not positive definite");
  return std::max({1.0, hi, 1.0 / lo});
}

ChartData make_chart(const ManifoldSpec& spec, const Vec& center, double radius, double bilip_constant) {
  if (!(radius > 0.0)) throw InputError("make_chart: radius must be positive");
  ChartData c;
  c.center = spec.normalize_point(center);
  c.radius = radius;
  c.bilip_constant = bilip_constant;
  c.frame = spec.tangent_frame(c.center);
  if (spec.is_riemannian()) {
    c.chart_norm = MinkowskiNorm::euclidean(spec.intrinsic_dim());
    if (spec.kind() == ManifoldKind::sphere2) {
      c.frame_inverse = c.frame.transpose();
    } else {
      c.frame_inverse = c.frame.inverse();
    }
  } else {
    c.chart_norm = spec.norm_at(c.center).transformed(c.frame);
    c.frame_inverse = c.frame.inverse();
  }
  c.equiv_constant = equivalence_constant(c.chart_norm);
  return c;
}

Vec to_chart(const ManifoldSpec& spec, const ChartData& chart, const Vec& x) {
  switch (spec.kind()) {
    case ManifoldKind::sphere2: return chart.frame_inverse * sphere_log(spec.radius(), chart.center, x);
    case ManifoldKind::flat_torus2: return chart.frame_inverse * spec.displacement(chart.center, x);
    default: return chart.frame_inverse * (x - chart.center);
  }
}

Vec from_chart(const ManifoldSpec& spec, const ChartData& chart, const Vec& u) {
  switch (spec.kind()) {
    case ManifoldKind::sphere2: return sphere_exp(spec.radius(), chart.center, chart.frame * u);
    case ManifoldKind::flat_torus2: return spec.normalize_point(chart.center + chart.frame * u);
    default: return chart.center + chart.frame * u;
  }
}

double measure_chart_distortion(const ManifoldSpec& spec, const Vec& x, double radius, int budget,
                                std::uint64_t seed) {
  const ChartData chart = make_chart(spec, x, radius, 1.0);
  const int n = spec.intrinsic_dim();
  Rng rng(seed);
  auto sample_ball = [&]() {
    Vec d = random_normal(rng, n);
    while (d.norm() < 1e-12) d = random_normal(rng, n);
    const double rho = radius * std::pow(random_uniform(rng, 0.0, 1.0), 1.0 / n);
    return Vec(rho * d / chart.chart_norm(d));
  };
  double worst = 1.0;
  for (int k = 0; k < budget; ++k) {
    const Vec u = sample_ball(), w = sample_ball();
    const double chart_len = chart.chart_norm(u - w);
    const double manifold_len = spec.distance(from_chart(spec, chart, u), from_chart(spec, chart, w));
    if (manifold_len < 1e-14 * std::max(1.0, radius) || chart_len < 1e-14 * std::max(1.0, radius)) continue;
    const double ratio = chart_len / manifold_len;
    worst = std::max({worst, ratio, 1.0 / ratio});
  }
  return worst;
}

BilipschitzRadius bilipschitz_radius(const ManifoldSpec& spec, const Vec& x, double eps, int budget,
                                     std::uint64_t seed) {
  if (!(eps > 0.0)) throw InputError("bilipschitz_radius: eps must be positive");
  if (budget < 1) throw InputError("bilipschitz_radius: budget must be positive");
  const double hint = spec.injectivity_hint();
  constexpr int kLevels = 20;
  auto radius_at = [&](int j) { return hint * std::ldexp(1.0, -j); };
  auto distortion_at = [&](int j) {
    return measure_chart_distortion(spec, x, radius_at(j), budget, seed * 1000003ULL + static_cast<std::uint64_t>(j));
  };
  const double limit = 1.0 + eps;

  double d0 = distortion_at(0);
  if (d0 <= limit) return {radius_at(0), d0};
  double d_last = distortion_at(kLevels);
  if (d_last > limit) {
    throw SearchFailure("bilipschitz_radius: no lattice radius down to " + std::to_string(radius_at(kLevels)) +
                        " is (1+eps)-biLipschitz (distortion " + std::to_string(d_last) + ")");
  }
  int lo = 0, hi = kLevels;
  double d_hi = d_last;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    const double d = distortion_at(mid);
    if (d <= limit) {
      hi = mid;
      d_hi = d;
    } else {
      lo = mid;
    }
  }
  return {radius_at(hi), d_hi};
}

namespace {

Mat matrix_from(const nlohmann::json& rows) {
  Mat m(rows.size(), rows.at(0).size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

MinkowskiNorm resolve_norm(const nlohmann::json& ref, const nlohmann::json& library) {
  if (ref.is_string()) {
    const auto name = ref.get<std::string>();
    if (!library.is_object() || !library.contains(name)) throw InputError("manifold spec: unknown norm '" + name + "'");
    return norm_from_json(library.at(name));
  }
  return norm_from_json(ref);
}

}  // namespace

nlohmann::json to_json(const ManifoldSpec& spec) {
  nlohmann::json doc = {{"kind", to_string(spec.kind())}};
  switch (spec.kind()) {
    case ManifoldKind::euclidean:
      doc["norm"] = to_json(spec.euclidean_norm());
      doc["domain"] = {spec.domain_lo(), spec.domain_hi()};
      break;
    case ManifoldKind::sphere2: doc["radius"] = spec.radius(); break;
    case ManifoldKind::flat_torus2: {
      doc["periods"] = {spec.periods()[0], spec.periods()[1]};
      const Mat& g = spec.torus_metric();
      doc["metric"] = {{g(0, 0), g(0, 1)}, {g(1, 0), g(1, 1)}};
      break;
    }
    case ManifoldKind::finsler_plane:
      doc["norm"] = to_json(spec.field().base);
      doc["conformal_amplitude"] = spec.field().conformal_amplitude;
      doc["rotation_rate"] = spec.field().rotation_rate;
      doc["domain"] = {spec.domain_lo(), spec.domain_hi()};
      break;
  }
  return doc;
}

ManifoldSpec manifold_from_json(const nlohmann::json& doc, const nlohmann::json& norm_library) {
  try {
    if (!doc.is_object() || !doc.contains("kind")) throw InputError("manifold spec: missing key 'kind'");
    const auto kind = doc.at("kind").get<std::string>();
    auto with_box = [&](ManifoldSpec s) {
      if (doc.contains("domain")) s = s.with_domain(doc["domain"].at(0).get<double>(), doc["domain"].at(1).get<double>());
      return s;
    };
    if (kind == "euclidean") {
      if (!doc.contains("norm")) throw InputError("manifold spec: missing key 'norm'");
      return with_box(ManifoldSpec::euclidean(resolve_norm(doc["norm"], norm_library)));
    }
    if (kind == "sphere2") return ManifoldSpec::sphere2(doc.value("radius", 1.0));
    if (kind == "flat_torus2") {
      Vec periods = Vec::Ones(2);
      if (doc.contains("periods")) periods << doc["periods"].at(0).get<double>(), doc["periods"].at(1).get<double>();
      const Mat metric = doc.contains("metric") ? matrix_from(doc["metric"]) : Mat(Mat::Identity(2, 2));
      return ManifoldSpec::flat_torus2(periods, metric);
    }
    if (kind == "finsler_plane") {
      FinslerPlaneField field;
      if (doc.contains("norm")) field.base = resolve_norm(doc["norm"], norm_library);
      field.conformal_amplitude = doc.value("conformal_amplitude", field.conformal_amplitude);
      field.rotation_rate = doc.value("rotation_rate", field.rotation_rate);
      return with_box(ManifoldSpec::finsler_plane(field));
    }
    throw InputError("manifold spec: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifold spec: ") + e.what());
  }
}

}  // namespace finslerkit
