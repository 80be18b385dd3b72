#include "finslerkit/minkowski.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace finslerkit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(const MinkowskiNorm& norm, const Vec& v, const char* what) {
  if (v.size() != norm.dim()) {
    throw InputError(std::string(what) + ": expected dimension " + std::to_string(norm.dim()) +
                     ", got " + std::to_string(v.size()));
  }
}

Vec axis(int dim, int i, double sign = 1.0) {
  Vec e = Vec::Zero(dim);
  e[i] = sign;
  return e;
}

// F^2 at v and its finite-difference Hessian with step h.
Mat fd_square_hessian(const MinkowskiNorm& norm, const Vec& v, double h) {
  const int n = norm.dim();
  auto sq = [&](const Vec& u) {
    const double f = norm(u);
    return f * f;
  };
  Mat hess(n, n);
  const double f0 = sq(v);
  for (int a = 0; a < n; ++a) {
    Vec ea = axis(n, a, h);
    hess(a, a) = (sq(v + ea) - 2.0 * f0 + sq(v - ea)) / (h * h);
    for (int b = a + 1; b < n; ++b) {
      Vec eb = axis(n, b, h);
      const double val =
          (sq(v + ea + eb) - sq(v + ea - eb) - sq(v - ea + eb) + sq(v - ea - eb)) / (4.0 * h * h);
      hess(a, b) = val;
      hess(b, a) = val;
    }
  }
  return hess;
}

std::vector<Vec> sphere_directions(int dim, int count) {
  std::vector<Vec> dirs;
  dirs.reserve(count + 2 * dim);
  if (dim == 1) {
    dirs.push_back(axis(1, 0, 1.0));
    dirs.push_back(axis(1, 0, -1.0));
    return dirs;
  }
  if (dim == 2) {
    for (int j = 0; j < count; ++j) {
      const double a = kTwoPi * j / count;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      dirs.push_back(u);
    }
    return dirs;
  }
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
      const double z = 1.0 - 2.0 * (j + 0.5) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * j;
      Vec u(3);
      u << rad * std::cos(phi), rad * std::sin(phi), z;
      dirs.push_back(u);
    }
  } else {
    Rng rng(0x5eedULL + static_cast<std::uint64_t>(dim));
    for (int j = 0; j < count; ++j) {
      Vec u = random_normal(rng, dim);
      dirs.push_back(u / u.norm());
    }
  }
  for (int i = 0; i < dim; ++i) {
    dirs.push_back(axis(dim, i, 1.0));
    dirs.push_back(axis(dim, i, -1.0));
  }
  return dirs;
}

// Orthonormal basis of the tangent space of the Euclidean unit sphere at u.
std::vector<Vec> tangent_basis(const Vec& u) {
  const int n = static_cast<int>(u.size());
  std::vector<Vec> basis;
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n - 1; ++i) {
    Vec t = axis(n, i);
    t -= t.dot(u) * u;
    for (const auto& b : basis) t -= t.dot(b) * b;
    const double len = t.norm();
    if (len > 1e-6) basis.push_back(t / len);
  }
  return basis;
}

}  // namespace

std::string to_string(NormFamily family) {
  switch (family) {
    case NormFamily::euclidean: return "euclidean";
    case NormFamily::weighted_lp: return "weighted_lp";
    case NormFamily::quartic_blend: return "quartic_blend";
    case NormFamily::custom_table: return "custom_table";
  }
  return "unknown";
}

NormFamily norm_family_from_string(const std::string& name) {
  if (name == "euclidean") return NormFamily::euclidean;
  if (name == "weighted_lp") return NormFamily::weighted_lp;
  if (name == "quartic_blend") return NormFamily::quartic_blend;
  if (name == "custom_table") return NormFamily::custom_table;
  throw InputError("unknown norm family '" + name + "'");
}

MinkowskiNorm MinkowskiNorm::euclidean(int dim) { return euclidean(Mat::Identity(dim, dim)); }

MinkowskiNorm MinkowskiNorm::euclidean(const Mat& gram) {
  if (gram.rows() < 1 || gram.rows() != gram.cols()) throw InputError("euclidean: gram must be square");
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, gram.cwiseAbs().maxCoeff())) {
    throw InputError("euclidean: gram must be symmetric");
  }
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) throw InputError("euclidean: gram must be positive definite");
  MinkowskiNorm n;
  n.dim_ = static_cast<int>(gram.rows());
  n.family_ = NormFamily::euclidean;
  n.gram_ = gram;
  return n;
}

MinkowskiNorm MinkowskiNorm::weighted_lp(double p, const Vec& weights) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("weighted_lp: p must be a finite value >= 1");
  if (weights.size() < 1) throw InputError("weighted_lp: empty weight vector");
  if ((weights.array() <= 0.0).any()) throw InputError("weighted_lp: weights must be positive");
  MinkowskiNorm n;
  n.dim_ = static_cast<int>(weights.size());
  n.family_ = NormFamily::weighted_lp;
  n.p_ = p;
  n.weights_ = weights;
  return n;
}

MinkowskiNorm MinkowskiNorm::lp(int dim, double p) { return weighted_lp(p, Vec::Ones(dim)); }

MinkowskiNorm MinkowskiNorm::quartic_blend(int dim, double theta) {
  if (dim < 1) throw InputError("quartic_blend: dim must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("quartic_blend: theta must lie in [0,1]");
  MinkowskiNorm n;
  n.dim_ = dim;
  n.family_ = NormFamily::quartic_blend;
  n.theta_ = theta;
  return n;
}

MinkowskiNorm MinkowskiNorm::custom_table(std::vector<double> circle_values) {
  if (circle_values.size() < 8) throw InputError("custom_table: need at least 8 circle values");
  for (double h : circle_values) {
    if (!(h >= 0.0) || !std::isfinite(h)) throw InputError("custom_table: values must be finite and >= 0");
  }
  MinkowskiNorm n;
  n.dim_ = 2;
  n.family_ = NormFamily::custom_table;
  const std::size_t size = circle_values.size();
  bool symmetric = size % 2 == 0;
  for (std::size_t j = 0; symmetric && j < size / 2; ++j) {
    symmetric = std::abs(circle_values[j] - circle_values[j + size / 2]) <= 1e-12 * std::max(1.0, circle_values[j]);
  }
  n.reversible_ = symmetric;
  n.table_ = std::move(circle_values);
  return n;
}

MinkowskiNorm MinkowskiNorm::transformed(const Mat& frame, double scale) const {
  if (frame.rows() != dim_ || frame.cols() != dim_) throw InputError("transformed: frame must be dim x dim");
  if (!(scale > 0.0)) throw InputError("transformed: scale must be positive");
  if (std::abs(frame.determinant()) < 1e-14) throw InputError("transformed: frame must be invertible");
  MinkowskiNorm n = *this;
  n.frame_ = frame_.size() == 0 ? frame : Mat(frame_ * frame);
  n.scale_ = scale_ * scale;
  return n;
}

bool MinkowskiNorm::is_smooth_strongly_convex() const {
  if (family_ == NormFamily::euclidean) return true;
  if (family_ == NormFamily::quartic_blend) return theta_ < 1.0;
  return false;
}

double MinkowskiNorm::base(const Vec& v) const {
  switch (family_) {
    case NormFamily::euclidean: return std::sqrt(std::max(0.0, v.dot(gram_ * v)));
    case NormFamily::weighted_lp: {
      if (p_ == 1.0) return (weights_.array() * v.array().abs()).sum();
      if (p_ == 2.0) return std::sqrt((weights_.array() * v.array().square()).sum());
      const double m = v.cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) acc += weights_[i] * std::pow(std::abs(v[i]) / m, p_);
      return m * std::pow(acc, 1.0 / p_);
    }
    case NormFamily::quartic_blend: {
      const double m = v.cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      const Vec u = v / m;
      const double s = u.squaredNorm();
      const double q = u.array().pow(4).sum();
      return m * std::pow((1.0 - theta_) * s * s + theta_ * q, 0.25);
    }
    case NormFamily::custom_table: {
      const double r = std::hypot(v[0], v[1]);
      if (r == 0.0) return 0.0;
      double a = std::atan2(v[1], v[0]);
      if (a < 0.0) a += kTwoPi;
      const std::size_t size = table_.size();
      const double pos = a / kTwoPi * static_cast<double>(size);
      std::size_t j = static_cast<std::size_t>(std::floor(pos));
      double t = pos - static_cast<double>(j);
      j %= size;
      const double h = (1.0 - t) * table_[j] + t * table_[(j + 1) % size];
      return r * h;
    }
  }
  return 0.0;
}

double MinkowskiNorm::operator()(const Vec& v) const {
  if (frame_.size() == 0) return scale_ * base(v);
  return scale_ * base(frame_ * v);
}

Vec MinkowskiNorm::base_half_square_gradient(const Vec& v) const {
  if (family_ == NormFamily::euclidean) return gram_ * v;
  if (family_ == NormFamily::quartic_blend) {
    const double s = v.squaredNorm();
    const double p4 = (1.0 - theta_) * s * s + theta_ * v.array().pow(4).sum();
    if (p4 == 0.0) return Vec::Zero(dim_);
    const Vec grad_p = 4.0 * (1.0 - theta_) * s * v + 4.0 * theta_ * v.array().cube().matrix();
    return grad_p / (4.0 * std::sqrt(p4));
  }
  const double h = 1e-6 * std::max(1.0, v.norm());
  Vec g(dim_);
  for (int i = 0; i < dim_; ++i) {
    const Vec e = axis(dim_, i, h);
    const double fp = base(v + e), fm = base(v - e);
    g[i] = (fp * fp - fm * fm) / (4.0 * h);
  }
  return g;
}

Mat MinkowskiNorm::base_half_square_hessian(const Vec& v) const {
  if (family_ == NormFamily::euclidean) return gram_;
  if (family_ == NormFamily::quartic_blend) {
    const double s = v.squaredNorm();
    const double p4 = (1.0 - theta_) * s * s + theta_ * v.array().pow(4).sum();
    if (p4 == 0.0) return Mat::Identity(dim_, dim_);
    const Vec grad_p = 4.0 * (1.0 - theta_) * s * v + 4.0 * theta_ * v.array().cube().matrix();
    Mat hess_p = 4.0 * (1.0 - theta_) * (s * Mat::Identity(dim_, dim_) + 2.0 * v * v.transpose());
    hess_p.diagonal() += 12.0 * theta_ * v.array().square().matrix();
    const double root = std::sqrt(p4);
    return hess_p / (4.0 * root) - grad_p * grad_p.transpose() / (8.0 * p4 * root);
  }
  MinkowskiNorm plain = *this;
  plain.frame_ = Mat();
  plain.scale_ = 1.0;
  return 0.5 * fd_square_hessian(plain, v, 1e-4 * std::max(1.0, v.norm()));
}

Vec MinkowskiNorm::half_square_gradient(const Vec& v) const {
  const double s2 = scale_ * scale_;
  if (frame_.size() == 0) return s2 * base_half_square_gradient(v);
  return s2 * frame_.transpose() * base_half_square_gradient(frame_ * v);
}

Mat MinkowskiNorm::half_square_hessian(const Vec& v) const {
  const double s2 = scale_ * scale_;
  if (frame_.size() == 0) return s2 * base_half_square_hessian(v);
  return s2 * frame_.transpose() * base_half_square_hessian(frame_ * v) * frame_;
}

bool operator==(const MinkowskiNorm& a, const MinkowskiNorm& b) {
  return a.dim_ == b.dim_ && a.family_ == b.family_ && a.reversible_ == b.reversible_ && a.p_ == b.p_ &&
         a.theta_ == b.theta_ && a.weights_ == b.weights_ && a.gram_ == b.gram_ && a.table_ == b.table_ &&
         a.frame_ == b.frame_ && a.scale_ == b.scale_;
}

double eval_norm(const MinkowskiNorm& norm, const Vec& v) {
  require_dim(norm, v, "eval_norm");
  return norm(v);
}

ConvexityReport validate_minkowski(const MinkowskiNorm& norm, int sample_count, std::uint64_t seed,
                                   const ValidationOptions& options) {
  if (sample_count < 1) throw InputError("validate_minkowski: sample_count must be >= 1");
  const int n = norm.dim();
  Rng rng(seed);
  ConvexityReport report;
  report.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();
  auto flag = [&](const Vec& v, const char* axiom, double residual) {
    report.violations.push_back({v, axiom, residual});
  };

  const Vec zero = Vec::Zero(n);
  if (norm(zero) != 0.0) flag(zero, "positivity", norm(zero));

  std::vector<Vec> samples;
  samples.reserve(sample_count + 2 * n);
  for (int i = 0; i < n; ++i) {
    samples.push_back(axis(n, i, 1.0));
    samples.push_back(axis(n, i, -1.0));
  }
  while (static_cast<int>(samples.size()) < sample_count + 2 * n) {
    Vec v = random_normal(rng, n);
    if (v.norm() > 1e-12) samples.push_back(v);
  }

  for (std::size_t idx = 0; idx < samples.size(); ++idx) {
    const Vec& v = samples[idx];
    const double fv = norm(v);
    if (!(fv > options.positivity_tol * v.norm())) flag(v, "positivity", fv);

    const double lambda = random_uniform(rng, 0.1, 10.0);
    const double hom = std::abs(norm(lambda * v) - lambda * fv);
    if (hom > options.homogeneity_tol * std::max(1.0, lambda * fv)) flag(v, "homogeneity", hom);

    const Vec& w = samples[(idx * 7919 + 1) % samples.size()];
    const double tri = norm(v + w) - fv - norm(w);
    if (tri > options.triangle_tol) flag(v, "triangle", tri);

    if (norm.reversible()) {
      const double rev = std::abs(norm(-v) - fv);
      if (rev > options.reversibility_tol * std::max(1.0, fv)) flag(v, "reversibility", rev);
    }

    const double h = 1e-4 * std::max(1.0, v.norm());
    const Mat coarse = fd_square_hessian(norm, v, h);
    const Mat fine = fd_square_hessian(norm, v, 0.5 * h);
    const Mat hess = (4.0 * fine - coarse) / 3.0;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (hess + hess.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    report.min_hessian_eigenvalue = std::min(report.min_hessian_eigenvalue, lmin);
    if (!(lmin > options.hessian_floor)) flag(v, "strong_convexity", lmin);
  }
  report.passed = report.violations.empty() && report.min_hessian_eigenvalue > 0.0;
  return report;
}

DualNormResult dual_norm_search(const MinkowskiNorm& norm, const Vec& omega) {
  require_dim(norm, omega, "dual_norm");
  const int n = norm.dim();
  auto ratio = [&](const Vec& u) { return omega.dot(u) / norm(u); };

  constexpr int kWarmStart = 4096;
  const auto dirs = sphere_directions(n, kWarmStart);
  Vec best = dirs.front();
  double best_val = -std::numeric_limits<double>::infinity();
  for (const auto& u : dirs) {
    const double fu = norm(u);
    if (!(fu > 0.0)) throw NumericError("dual_norm: norm vanishes on a unit direction; not positive definite");
    const double val = omega.dot(u) / fu;
    if (val > best_val) {
      best_val = val;
      best = u;
    }
  }

  DualNormResult result;
  if (omega.norm() == 0.0) {
    result.value = 0.0;
    result.maximizer = best / norm(best);
    return result;
  }

  double step;
  if (n == 1) step = 0.0;
  else if (n == 2) step = 2.0 * kTwoPi / kWarmStart;
  else if (n == 3) step = 2.0 * std::sqrt(4.0 * std::numbers::pi / kWarmStart);
  else step = 0.5;

  constexpr double kStop = 1e-10;
  constexpr int kMaxEvaluations = 200000;
  int evaluations = 0;
  while (step > kStop && evaluations < kMaxEvaluations) {
    bool improved = false;
    for (const auto& t : tangent_basis(best)) {
      for (double sgn : {1.0, -1.0}) {
        Vec cand = best + sgn * step * t;
        cand /= cand.norm();
        const double val = ratio(cand);
        ++evaluations;
        if (val > best_val) {
          best_val = val;
          best = cand;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (step > 1e-6) {
    throw NumericError("dual_norm: ascent did not converge (angular step " + std::to_string(step) + " after " +
                       std::to_string(evaluations) + " evaluations, value " + std::to_string(best_val) + ")");
  }
  result.value = std::max(0.0, best_val);
  result.maximizer = best / norm(best);
  result.residual = step;
  return result;
}

double dual_norm(const MinkowskiNorm& norm, const Vec& omega) { return dual_norm_search(norm, omega).value; }

double dual_norm_convex(const MinkowskiNorm& norm, const Vec& omega) {
  require_dim(norm, omega, "dual_norm_convex");
  const int n = norm.dim();
  if (omega.norm() == 0.0) return 0.0;
  const bool framed = norm.frame().size() != 0;
  if (norm.family() == NormFamily::euclidean || norm.family() == NormFamily::weighted_lp) {
    // F(v) = s B(A v)  =>  F*(omega) = B*(A^{-T} omega) / s.
    const Vec eta = framed ? Vec(norm.frame().transpose().fullPivLu().solve(omega)) : omega;
    double base_dual;
    if (norm.family() == NormFamily::euclidean) {
      base_dual = std::sqrt(std::max(0.0, eta.dot(norm.gram().llt().solve(eta))));
    } else if (norm.p() == 1.0) {
      base_dual = (eta.array().abs() / norm.weights().array()).maxCoeff();
    } else {
      const double p = norm.p();
      const double q = p / (p - 1.0);
      const Vec scaled = (eta.array().abs() * norm.weights().array().pow(-1.0 / p)).matrix();
      const double m = scaled.maxCoeff();
      base_dual = m * std::pow((scaled.array() / m).pow(q).sum(), 1.0 / q);
    }
    return base_dual / norm.scale();
  }
  if (!norm.is_smooth_strongly_convex()) return dual_norm_search(norm, omega).value;

  // Maximize <omega,u> - F(u)^2/2; the optimal value is F*(omega)^2/2.
  auto phi = [&](const Vec& u) {
    const double f = norm(u);
    return omega.dot(u) - 0.5 * f * f;
  };
  Vec u = omega;
  {
    const double fu = norm(u);
    u *= omega.squaredNorm() / (fu * fu);
  }
  double value = phi(u);
  for (int it = 0; it < 100; ++it) {
    const Vec residual = omega - norm.half_square_gradient(u);
    if (residual.norm() <= 1e-15 * omega.norm() * std::max(1.0, static_cast<double>(n))) break;
    const Vec step = norm.half_square_hessian(u).ldlt().solve(residual);
    double t = 1.0;
    Vec cand = u + step;
    double cand_value = phi(cand);
    while (cand_value < value && t > 1e-12) {
      t *= 0.5;
      cand = u + t * step;
      cand_value = phi(cand);
    }
    if (cand_value < value) break;
    const bool stalled = cand_value - value <= 1e-17 * std::abs(value);
    u = cand;
    value = cand_value;
    if (stalled && residual.norm() <= 1e-10 * omega.norm()) break;
  }
  return std::sqrt(std::max(0.0, 2.0 * value));
}

MinkowskiNorm dual_table_norm(const MinkowskiNorm& norm, int resolution) {
  if (norm.dim() != 2) throw InputError("dual_table_norm: only dim 2 norms can be tabulated");
  if (resolution < 8) throw InputError("dual_table_norm: resolution must be >= 8");
  std::vector<double> values(resolution);
  for (int j = 0; j < resolution; ++j) {
    const double a = kTwoPi * j / resolution;
    Vec u(2);
    u << std::cos(a), std::sin(a);
    values[j] = dual_norm(norm, u);
  }
  // Enforce the exact symmetry of reversible tables that rounding in the
  // ascent would otherwise break.
  if (norm.reversible() && resolution % 2 == 0) {
    for (int j = 0; j < resolution / 2; ++j) {
      const double m = 0.5 * (values[j] + values[j + resolution / 2]);
      values[j] = values[j + resolution / 2] = m;
    }
  }
  return MinkowskiNorm::custom_table(std::move(values));
}

double parallelogram_defect(const MinkowskiNorm& norm, const Vec& v, const Vec& w) {
  require_dim(norm, v, "parallelogram_defect");
  require_dim(norm, w, "parallelogram_defect");
  const double a = norm(v + w), b = norm(v - w), c = norm(v), d = norm(w);
  return a * a + b * b - 2.0 * c * c - 2.0 * d * d;
}

namespace {

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const nlohmann::json& rows, const char* key) {
  if (!rows.is_array() || rows.empty()) throw InputError(std::string("norm spec: '") + key + "' must be a matrix");
  const auto r = rows.size();
  const auto c = rows[0].size();
  Mat m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw InputError(std::string("norm spec: ragged matrix '") + key + "'");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

const nlohmann::json& require_key(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(std::string("norm spec: missing key '") + key + "'");
  return doc.at(key);
}

}  // namespace

nlohmann::json to_json(const MinkowskiNorm& norm) {
  nlohmann::json params = nlohmann::json::object();
  switch (norm.family()) {
    case NormFamily::euclidean:
      if (!norm.gram().isIdentity(0.0)) params["gram"] = matrix_to_json(norm.gram());
      break;
    case NormFamily::weighted_lp:
      params["p"] = norm.p();
      params["weights"] = std::vector<double>(norm.weights().data(), norm.weights().data() + norm.dim());
      break;
    case NormFamily::quartic_blend: params["theta"] = norm.theta(); break;
    case NormFamily::custom_table: params["values"] = norm.table(); break;
  }
  if (norm.frame().size() != 0) params["frame"] = matrix_to_json(norm.frame());
  if (norm.scale() != 1.0) params["scale"] = norm.scale();
  return {{"family", to_string(norm.family())},
          {"dim", norm.dim()},
          {"parameters", params},
          {"reversible", norm.reversible()}};
}

MinkowskiNorm norm_from_json(const nlohmann::json& doc) {
  try {
    const auto family = norm_family_from_string(require_key(doc, "family").get<std::string>());
    const int dim = require_key(doc, "dim").get<int>();
    if (dim < 1) throw InputError("norm spec: dim must be positive");
    const nlohmann::json params = doc.value("parameters", nlohmann::json::object());
    MinkowskiNorm norm = MinkowskiNorm::euclidean(dim);
    switch (family) {
      case NormFamily::euclidean:
        norm = params.contains("gram") ? MinkowskiNorm::euclidean(matrix_from_json(params["gram"], "gram"))
                                       : MinkowskiNorm::euclidean(dim);
        break;
      case NormFamily::weighted_lp: {
        const double p = require_key(params, "p").get<double>();
        Vec w = Vec::Ones(dim);
        if (params.contains("weights")) {
          const auto ws = params["weights"].get<std::vector<double>>();
          w = Eigen::Map<const Vec>(ws.data(), static_cast<Eigen::Index>(ws.size()));
        }
        norm = MinkowskiNorm::weighted_lp(p, w);
        break;
      }
      case NormFamily::quartic_blend:
        norm = MinkowskiNorm::quartic_blend(dim, require_key(params, "theta").get<double>());
        break;
      case NormFamily::custom_table:
        norm = MinkowskiNorm::custom_table(require_key(params, "values").get<std::vector<double>>());
        break;
    }
    if (norm.dim() != dim) throw InputError("norm spec: parameters disagree with dim");
    if (params.contains("frame") || params.contains("scale")) {
      const Mat frame = params.contains("frame") ? matrix_from_json(params["frame"], "frame") : Mat::Identity(dim, dim);
      norm = norm.transformed(frame, params.value("scale", 1.0));
    }
    if (doc.contains("reversible") && doc["reversible"].get<bool>() != norm.reversible()) {
      throw InputError("norm spec: reversible flag contradicts the norm parameters");
    }
    return norm;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("norm spec: ") + e.what());
  }
}

nlohmann::json to_json(const ConvexityReport& report) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"sample", std::vector<double>(v.sample.data(), v.sample.data() + v.sample.size())},
                          {"axiom", v.axiom},
                          {"residual", v.residual}});
  }
  return {{"passed", report.passed},
          {"min_hessian_eigenvalue", report.min_hessian_eigenvalue},
          {"violation_count", report.violations.size()},
          {"violations", violations}};
}

}  // namespace finslerkit
