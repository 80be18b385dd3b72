#include "finslerkit/quotient.hpp"

#include "finslerkit/simplex.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace finslerkit {

namespace {

void require_dim(const QuotientInstance& inst, const Vec& x, const char* what) {
  if (x.size() != inst.dim())
    throw InputError(std::string(what) + ": expected " + std::to_string(inst.dim()) + " components, got " +
                     std::to_string(x.size()));
}

// Polyhedral norms F(v) = s sum_i w_i |(M v)_i| written as
// F*(lambda) = max_i |(T lambda)_i| / w_i with T = M^{-T} / s.
struct PolyhedralForm {
  Mat T;  // dual side
  Mat M;  // primal side, times s
  Vec w;
};

PolyhedralForm polyhedral_form(const MinkowskiNorm& norm) {
  const int n = norm.dim();
  PolyhedralForm p;
  const Mat frame = norm.frame().size() ? norm.frame() : Mat(Mat::Identity(n, n));
  p.M = norm.scale() * frame;
  p.T = frame.transpose().fullPivLu().inverse() / norm.scale();
  p.w = norm.weights();
  return p;
}

double polyhedral_dual(const PolyhedralForm& p, const Vec& lambda) {
  return ((p.T * lambda).array().abs() / p.w.array()).maxCoeff();
}

double polyhedral_primal(const PolyhedralForm& p, const Vec& v) {
  return (p.w.array() * (p.M * v).array().abs()).sum();
}

// Solution of the class problem: the element plus the primal maximizer in
// K-perp coordinates (Newton path only).
struct ClassSolve {
  QuotientElement element;
  Vec u;
};

ClassSolve solve_newton(const QuotientInstance& inst, const Vec& omega, const Vec& c, const QuotientOptions& opt) {
  // min_u F(Zu)^2/2 - <c, u>; the optimum value is -class_norm^2/2 and
  // grad(F^2/2)(Zu*) lies in the coset.
  const MinkowskiNorm& F = inst.norm();
  const Mat& Z = inst.annihilator();
  auto h = [&](const Vec& u) {
    const double f = F(Z * u);
    return 0.5 * f * f - c.dot(u);
  };
  Vec u = c;
  {
    const double fu = F(Z * u);
    u *= c.squaredNorm() / (fu * fu);
  }
  double value = h(u);
  int it = 0;
  bool converged = false;
  for (; it < opt.newton_max_iter; ++it) {
    const Vec v = Z * u;
    const Vec grad = Z.transpose() * F.half_square_gradient(v) - c;
    if (grad.norm() <= opt.newton_tol * c.norm()) {
      converged = true;
      break;
    }
    const Mat hess = Z.transpose() * F.half_square_hessian(v) * Z;
    const Vec step = -hess.ldlt().solve(grad);
    auto grad_at = [&](const Vec& w) { return Vec(Z.transpose() * F.half_square_gradient(Z * w) - c); };
    double t = 1.0;
    Vec cand = u + step;
    double cand_value = h(cand);
    // Near the optimum h is flat to working precision; a full step that
    // shrinks the gradient is then accepted on that evidence alone.
    if (!(cand_value < value) && !(grad_at(cand).norm() < 0.5 * grad.norm())) {
      while (!(cand_value < value) && t > 1e-12) {
        t *= 0.5;
        cand = u + t * step;
        cand_value = h(cand);
      }
      if (!(cand_value < value)) {
        converged = grad.norm() <= 1e-10 * c.norm();
        break;
      }
    }
    u = cand;
    value = cand_value;
  }
  const Vec v = Z * u;
  Vec lift = F.half_square_gradient(v);
  lift += Z * (c - Z.transpose() * lift);  // back onto the coset
  ClassSolve out;
  out.u = u;
  auto& e = out.element;
  e.representative = omega;
  e.lift = lift;
  e.class_norm = inst.dual_norm_of(lift);
  e.dual_bound = c.dot(u) / F(v);
  e.gap = e.class_norm - e.dual_bound;
  e.solver = QuotientSolver::newton;
  e.iterations = it;
  if (!converged)
    throw NumericError("project_P: Newton did not converge after " + std::to_string(it) +
                       " iterations (gap " + std::to_string(e.gap) + ")");
  return out;
}

QuotientElement solve_simplex(const QuotientInstance& inst, const Vec& omega, const Vec& c) {
  const int n = inst.dim();
  const int k = inst.kernel_dim();
  const int r = n - k;
  const PolyhedralForm p = polyhedral_form(inst.norm());
  const Mat TK = p.T * inst.kernel();
  const Vec To = p.T * omega;

  // Primal: min t  s.t. +-(T(omega + K y))_i <= w_i t, variables (y, t).
  Mat A(2 * n, k + 1);
  Vec b(2 * n);
  A.topLeftCorner(n, k) = TK;
  A.bottomLeftCorner(n, k) = -TK;
  A.col(k).head(n) = -p.w;
  A.col(k).tail(n) = -p.w;
  b.head(n) = -To;
  b.tail(n) = To;
  Vec cost = Vec::Zero(k + 1);
  cost[k] = 1.0;
  const LpResult primal = solve_lp(cost, A, b);
  if (primal.status != LpStatus::optimal) throw NumericError("project_P: class program not solved");

  // Dual: max <c, a> s.t. F(Z a) <= 1, variables (a, e) with |(M Z a)_i| <= e_i.
  const Mat MZ = p.M * inst.annihilator();
  Mat D = Mat::Zero(2 * n + 1, r + n);
  Vec db = Vec::Zero(2 * n + 1);
  D.topLeftCorner(n, r) = MZ;
  D.block(0, r, n, n) = -Mat::Identity(n, n);
  D.block(n, 0, n, r) = -MZ;
  D.block(n, r, n, n) = -Mat::Identity(n, n);
  D.block(2 * n, r, 1, n) = p.w.transpose();
  db[2 * n] = 1.0;
  Vec dcost = Vec::Zero(r + n);
  dcost.head(r) = -c;
  const LpResult dual = solve_lp(dcost, D, db);
  if (dual.status != LpStatus::optimal) throw NumericError("project_P: dual program not solved");

  QuotientElement e;
  e.representative = omega;
  e.lift = omega + inst.kernel() * primal.x.head(k);
  e.class_norm = polyhedral_dual(p, e.lift);
  const Vec v = inst.annihilator() * dual.x.head(r);
  e.dual_bound = c.dot(dual.x.head(r)) / polyhedral_primal(p, v);
  e.gap = e.class_norm - e.dual_bound;
  e.solver = QuotientSolver::simplex;
  e.iterations = primal.pivots + dual.pivots;
  return e;
}

QuotientElement solve_subgradient(const QuotientInstance& inst, const Vec& omega, const Vec& c,
                                  const QuotientOptions& opt) {
  // Projected subgradient on the coset with the Polyak step toward the best
  // certified lower bound.
  const MinkowskiNorm& F = inst.norm();
  const Mat& Z = inst.annihilator();
  Vec lambda = omega;
  QuotientElement e;
  e.representative = omega;
  e.lift = omega;
  e.class_norm = inst.dual_norm_of(omega);
  e.dual_bound = 0.0;
  int it = 0;
  for (; it < opt.subgradient_max_iter; ++it) {
    const DualNormResult d = dual_norm_search(F, lambda);
    const double value = inst.dual_norm_of(lambda);
    if (value < e.class_norm) {
      e.class_norm = value;
      e.lift = lambda;
    }
    const Vec u = Z * (Z.transpose() * d.maximizer);
    const double fu = F(u);
    if (fu > 0.0) e.dual_bound = std::max(e.dual_bound, omega.dot(u) / fu);
    if (e.class_norm - e.dual_bound <= opt.gap_tol * std::max(1.0, e.class_norm)) break;
    const Vec g = d.maximizer - u;  // subgradient component along K
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) break;
    lambda -= ((value - e.dual_bound) / g2) * g;
  }
  e.lift += Z * (c - Z.transpose() * e.lift);
  e.class_norm = inst.dual_norm_of(e.lift);
  e.gap = e.class_norm - e.dual_bound;
  e.solver = QuotientSolver::subgradient;
  e.iterations = it;
  return e;
}

void check_gap(const QuotientElement& e, const QuotientOptions& opt) {
  if (!(e.gap <= opt.gap_tol * std::max(1.0, e.class_norm)))
    throw NumericError("project_P: " + to_string(e.solver) + " stopped with duality gap " + std::to_string(e.gap) +
                       " (class " + std::to_string(e.class_norm) + ", bound " + std::to_string(e.dual_bound) + ")");
}

ClassSolve solve_class(const QuotientInstance& inst, const Vec& omega, const QuotientOptions& opt) {
  require_dim(inst, omega, "project_P");
  if (!omega.allFinite()) throw InputError("project_P: non-finite covector");
  const Vec c = inst.annihilator().transpose() * omega;
  ClassSolve out;
  auto& e = out.element;
  e.representative = omega;
  const double rep_norm = inst.dual_norm_of(omega);
  if (inst.kernel_dim() == inst.dim() || c.norm() == 0.0) {
    // omega + K contains 0 exactly only when omega is in K; otherwise the
    // class is numerically zero and the lift is the K-free part.
    e.lift = inst.annihilator() * c;
    e.class_norm = 0.0;
    e.solver = QuotientSolver::trivial;
    out.u = Vec::Zero(c.size());
    return out;
  }
  if (inst.kernel_dim() == 0 && !opt.force_subgradient) {
    e.lift = omega;
    e.class_norm = rep_norm;
    e.dual_bound = rep_norm;
    e.solver = QuotientSolver::trivial;
    if (inst.norm().is_smooth_strongly_convex()) out.u = solve_newton(inst, omega, c, opt).u;
    return out;
  }
  const MinkowskiNorm& F = inst.norm();
  if (opt.force_subgradient) {
    e = solve_subgradient(inst, omega, c, opt);
  } else if (F.is_smooth_strongly_convex()) {
    out = solve_newton(inst, omega, c, opt);
  } else if (F.is_polyhedral()) {
    e = solve_simplex(inst, omega, c);
  } else {
    e = solve_subgradient(inst, omega, c, opt);
  }
  check_gap(e, opt);
  if (rep_norm <= e.class_norm) {
    e.lift = omega;
    e.class_norm = rep_norm;
    e.gap = e.class_norm - e.dual_bound;
  }
  return out;
}

}  // namespace

QuotientInstance::QuotientInstance(MinkowskiNorm norm, Mat kernel) : norm_(std::move(norm)), kernel_(std::move(kernel)) {
  const int n = norm_.dim();
  if (kernel_.rows() != n && !(kernel_.size() == 0))
    throw InputError("quotient instance: kernel covectors must have " + std::to_string(n) + " components");
  if (kernel_.size() == 0) kernel_.resize(n, 0);
  const int k = static_cast<int>(kernel_.cols());
  if (k > n) throw InputError("quotient instance: more kernel covectors than the dimension");
  if (!kernel_.allFinite()) throw InputError("quotient instance: non-finite kernel entry");
  if (k > 0) {
    Eigen::ColPivHouseholderQR<Mat> rank_qr(kernel_);
    rank_qr.setThreshold(1e-10);
    if (rank_qr.rank() != k) throw InputError("quotient instance: kernel covectors are linearly dependent");
  }
  const Mat Q = Eigen::HouseholderQR<Mat>(kernel_).householderQ() * Mat::Identity(n, n);
  kernel_q_ = Q.leftCols(k);
  annihilator_ = Q.rightCols(n - k);
}

Vec QuotientInstance::remove_kernel(const Vec& omega) const { return omega - kernel_q_ * (kernel_q_.transpose() * omega); }

double QuotientInstance::norm_of(const Vec& v) const { return norm_(v); }

double QuotientInstance::dual_norm_of(const Vec& omega) const { return dual_norm_convex(norm_, omega); }

std::string to_string(QuotientSolver s) {
  switch (s) {
    case QuotientSolver::trivial: return "trivial";
    case QuotientSolver::newton: return "newton";
    case QuotientSolver::simplex: return "simplex";
    case QuotientSolver::subgradient: return "subgradient";
  }
  return "unknown";
}

QuotientElement project_P(const QuotientInstance& inst, const Vec& omega, const QuotientOptions& options) {
  return solve_class(inst, omega, options).element;
}

Vec minimal_lift(const QuotientInstance& inst, const QuotientElement& element) {
  require_dim(inst, element.representative, "minimal_lift");
  if (element.lift.size() == inst.dim()) return element.lift;
  return project_P(inst, element.representative).lift;
}

VectorResult iota_embed(const QuotientInstance& inst, const Vec& v, const QuotientOptions& options) {
  require_dim(inst, v, "iota_embed");
  const Mat& Z = inst.annihilator();
  const Vec a = Z.transpose() * v;
  const double off = (v - Z * a).norm();
  if (off > 1e-10 * std::max(1.0, v.norm()))
    throw PreconditionError("iota_embed: vector does not annihilate K (residual " + std::to_string(off) + ")");
  VectorResult out;
  out.embedded = v;
  out.maximizer = Vec::Zero(inst.dim());
  out.concrete_norm = inst.norm_of(v);
  if (Z.cols() == 0 || a.norm() == 0.0) return out;

  const MinkowskiNorm& F = inst.norm();
  Vec c;
  if (F.is_smooth_strongly_convex() && !options.force_subgradient) {
    // max_c <c, a> - q(c)^2/2 over quotient coordinates, where the gradient
    // of q^2/2 is the primal optimizer of the class problem.
    c = a;
    int it = 0;
    for (; it < options.newton_max_iter; ++it) {
      const ClassSolve s = solve_class(inst, Z * c, options);
      const Vec residual = a - s.u;
      out.gap = residual.norm() / a.norm();
      if (out.gap <= 10.0 * options.newton_tol) break;
      const Mat hess = Z.transpose() * F.half_square_hessian(Z * s.u) * Z;
      c += hess * residual;
    }
    if (it == options.newton_max_iter) throw NumericError("iota_embed: ascent did not converge");
  } else if (F.is_polyhedral() && !options.force_subgradient) {
    // max <c, a> s.t. +-(T(Z c + K y))_i <= w_i, variables (c, y).
    const int n = inst.dim();
    const int k = inst.kernel_dim();
    const int r = n - k;
    const PolyhedralForm p = polyhedral_form(F);
    Mat B(n, r + k);
    B << p.T * Z, p.T * inst.kernel();
    Mat A(2 * n, r + k);
    A << B, -B;
    Vec b(2 * n);
    b << p.w, p.w;
    Vec cost = Vec::Zero(r + k);
    cost.head(r) = -a;
    const LpResult lp = solve_lp(cost, A, b);
    if (lp.status != LpStatus::optimal) throw NumericError("iota_embed: program not solved");
    c = lp.x.head(r);
  } else {
    // Subgradient of F at v, by central differences.
    Vec grad(inst.dim());
    const double h = 1e-6 * std::max(1.0, v.norm());
    for (int i = 0; i < inst.dim(); ++i) {
      Vec e = Vec::Zero(inst.dim());
      e[i] = h;
      grad[i] = (F(v + e) - F(v - e)) / (2.0 * h);
    }
    c = Z.transpose() * grad;
  }
  const double q = project_P(inst, Z * c, options).class_norm;
  if (!(q > 0.0)) throw NumericError("iota_embed: degenerate maximizer");
  out.maximizer = Z * (c / q);
  out.abstract_norm = c.dot(a) / q;
  if (F.is_polyhedral() && !options.force_subgradient) out.gap = std::abs(q - 1.0);
  return out;
}

std::vector<QuotientCase> random_quotient_cases(int count, std::uint64_t seed) {
  if (count < 0) throw InputError("random_quotient_cases: negative count");
  Rng rng(seed);
  std::vector<QuotientCase> cases;
  cases.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int n = std::uniform_int_distribution<int>(2, 6)(rng);
    const int k = std::uniform_int_distribution<int>(0, std::min(3, n - 1))(rng);
    const int family = std::uniform_int_distribution<int>(0, 2)(rng);
    MinkowskiNorm norm = MinkowskiNorm::euclidean(n);
    if (family == 0) {
      Mat A(n, n);
      for (int j = 0; j < n; ++j) A.col(j) = random_normal(rng, n);
      norm = MinkowskiNorm::euclidean(A.transpose() * A / n + 0.25 * Mat::Identity(n, n));
    } else if (family == 1) {
      Vec w(n);
      for (int j = 0; j < n; ++j) w[j] = random_uniform(rng, 0.5, 2.0);
      norm = MinkowskiNorm::weighted_lp(1.0, w);
    } else {
      norm = MinkowskiNorm::quartic_blend(n, random_uniform(rng, 0.1, 0.9));
    }
    Mat K(n, k);
    for (int j = 0; j < k; ++j) K.col(j) = random_normal(rng, n);
    QuotientInstance inst(std::move(norm), std::move(K));
    const Vec omega = random_normal(rng, n);
    const Vec v = inst.annihilator() * random_normal(rng, n - k);
    char id[16];
    std::snprintf(id, sizeof id, "r%03d", i);
    cases.push_back(QuotientCase{id, std::move(inst), omega, v});
  }
  return cases;
}

QuotientBatchReport run_quotient_batch(const std::vector<QuotientCase>& cases, const QuotientBatchOptions& options) {
  QuotientBatchReport report;
  Rng rng(options.seed);
  for (const auto& qc : cases) {
    const QuotientInstance& inst = qc.instance;
    QuotientRow row;
    row.id = qc.id;
    row.norm_family = to_string(inst.norm().family());
    const QuotientElement e = project_P(inst, qc.covector, options.solver);
    const Vec lift = minimal_lift(inst, e);
    row.solver = e.solver;
    row.class_norm = e.class_norm;
    row.lift_norm = inst.dual_norm_of(lift);
    row.rep_norm = inst.dual_norm_of(qc.covector);
    row.lift_residual = (inst.annihilator().transpose() * (lift - qc.covector)).norm();
    const Vec v = qc.vector ? *qc.vector : Vec(inst.annihilator() * random_normal(rng, inst.dim() - inst.kernel_dim()));
    const VectorResult iv = iota_embed(inst, v, options.solver);
    row.abstract_norm = iv.abstract_norm;
    row.concrete_norm = iv.concrete_norm;
    const double lift_err = std::max(std::abs(row.lift_norm - row.class_norm), std::max(0.0, e.gap));
    const double iso_err = std::abs(row.abstract_norm - row.concrete_norm);
    row.gap = std::max(std::max(0.0, e.gap), iso_err);
    row.contraction_ok = row.class_norm <= row.rep_norm;
    row.lift_ok = lift_err <= options.lift_tol && row.lift_residual <= 1e-10 * std::max(1.0, qc.covector.norm());
    row.isometry_ok = iso_err <= options.isometry_tol;
    report.max_gap = std::max(report.max_gap, row.gap);
    report.max_lift_error = std::max(report.max_lift_error, lift_err);
    report.max_isometry_error = std::max(report.max_isometry_error, iso_err);
    report.rows.push_back(row);
  }
  report.passed = true;
  for (const auto& r : report.rows) report.passed = report.passed && r.contraction_ok && r.lift_ok && r.isometry_ok;
  return report;
}

void write_quotient_csv(std::ostream& out, const QuotientBatchReport& report) {
  out << "id,class_norm,lift_norm,abstract_norm,concrete_norm,gap\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g\n", r.class_norm, r.lift_norm, r.abstract_norm,
                  r.concrete_norm, r.gap);
    out << r.id << buf;
  }
}

nlohmann::json to_json(const QuotientBatchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"id", r.id},
                    {"norm_family", r.norm_family},
                    {"solver", to_string(r.solver)},
                    {"contraction_ok", r.contraction_ok},
                    {"lift_ok", r.lift_ok},
                    {"isometry_ok", r.isometry_ok}});
  return {{"instances", report.rows.size()},
          {"max_gap", report.max_gap},
          {"max_lift_error", report.max_lift_error},
          {"max_isometry_error", report.max_isometry_error},
          {"passed", report.passed},
          {"rows", rows}};
}

namespace {

Vec vec_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string("quotient case: '") + what + "' must be an array of numbers");
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

nlohmann::json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(std::string("quotient case: missing key '") + key + "'");
  return doc.at(key);
}

}  // namespace

nlohmann::json to_json(const QuotientInstance& inst) {
  nlohmann::json kernel = nlohmann::json::array();
  for (int j = 0; j < inst.kernel_dim(); ++j) kernel.push_back(vec_to_json(inst.kernel().col(j)));
  return {{"norm", to_json(inst.norm())}, {"kernel", kernel}};
}

QuotientInstance quotient_instance_from_json(const nlohmann::json& doc) {
  try {
    MinkowskiNorm norm = norm_from_json(require(doc, "norm"));
    const auto& kj = doc.contains("kernel") ? doc.at("kernel") : nlohmann::json::array();
    if (!kj.is_array()) throw InputError("quotient case: 'kernel' must be a list of covectors");
    Mat K(norm.dim(), static_cast<Eigen::Index>(kj.size()));
    for (size_t j = 0; j < kj.size(); ++j) {
      const Vec col = vec_from_json(kj[j], "kernel");
      if (col.size() != norm.dim()) throw InputError("quotient case: kernel covector has the wrong dimension");
      K.col(static_cast<Eigen::Index>(j)) = col;
    }
    return QuotientInstance(std::move(norm), std::move(K));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("quotient case: ") + e.what());
  }
}

nlohmann::json to_json(const QuotientCase& c) {
  nlohmann::json doc = to_json(c.instance);
  doc["id"] = c.id;
  doc["covector"] = vec_to_json(c.covector);
  if (c.vector) doc["vector"] = vec_to_json(*c.vector);
  return doc;
}

QuotientCase quotient_case_from_json(const nlohmann::json& doc) {
  try {
    QuotientInstance inst = quotient_instance_from_json(doc);
    Vec omega = vec_from_json(require(doc, "covector"), "covector");
    if (omega.size() != inst.dim()) throw InputError("quotient case: covector has the wrong dimension");
    std::optional<Vec> v;
    if (doc.contains("vector")) {
      v = vec_from_json(doc.at("vector"), "vector");
      if (v->size() != inst.dim()) throw InputError("quotient case: vector has the wrong dimension");
    }
    return QuotientCase{doc.value("id", std::string("case")), std::move(inst), std::move(omega), std::move(v)};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("quotient case: ") + e.what());
  }
}

std::vector<QuotientCase> quotient_cases_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("quotient batch: expected an object with 'cases' or 'random'");
  std::vector<QuotientCase> cases;
  try {
    if (doc.contains("random")) {
      const auto& r = doc.at("random");
      cases = random_quotient_cases(r.value("count", 200), r.value("seed", std::uint64_t{1}));
    }
    if (doc.contains("cases")) {
      if (!doc.at("cases").is_array()) throw InputError("quotient batch: 'cases' must be a list");
      for (const auto& c : doc.at("cases")) cases.push_back(quotient_case_from_json(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("quotient batch: ") + e.what());
  }
  if (cases.empty()) throw InputError("quotient batch: no instances ('cases' or 'random' required)");
  return cases;
}

}  // namespace finslerkit
