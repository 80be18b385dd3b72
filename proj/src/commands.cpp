#include "finslerkit/commands.hpp"

#include "finslerkit/metric_graph.hpp"
#include "finslerkit/quotient.hpp"
#include "finslerkit/smoothing.hpp"
#include "finslerkit/sobolev.hpp"
#include "finslerkit/test_functions.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace finslerkit {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw InputError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

SampledManifold load_graph(const RunConfig& cfg, int default_n) {
  const ManifoldSpec spec = cfg.manifold();
  return sample_manifold(spec, cfg.sample_count(default_n), cfg.measure(spec), cfg.seed, cfg.neighbor_count());
}

}  // namespace

int cmd_validate_norm(const RunConfig& cfg, std::ostream& log) {
  const MinkowskiNorm norm = cfg.norm();
  const int samples = cfg.positive_int("samples", 10000);
  ValidationOptions opt;
  opt.homogeneity_tol = cfg.positive("homogeneity_tol", opt.homogeneity_tol);
  opt.triangle_tol = cfg.positive("triangle_tol", opt.triangle_tol);
  opt.reversibility_tol = cfg.positive("reversibility_tol", opt.reversibility_tol);
  opt.positivity_tol = cfg.positive("positivity_tol", opt.positivity_tol);
  opt.hessian_floor = cfg.positive("hessian_floor", opt.hessian_floor);
  const ConvexityReport report = validate_minkowski(norm, samples, cfg.seed, opt);
  nlohmann::json doc = to_json(report);
  doc["thresholds"] = {{"homogeneity_tol", opt.homogeneity_tol},   {"triangle_tol", opt.triangle_tol},
                       {"reversibility_tol", opt.reversibility_tol}, {"positivity_tol", opt.positivity_tol},
                       {"hessian_floor", opt.hessian_floor}};
  doc["norm"] = to_json(norm);
  doc["samples"] = samples;
  doc["seed"] = cfg.seed;
  write_json(cfg.out_dir / "norm_report.json", doc);
  log << "validate-norm: " << (report.passed ? "passed" : "failed") << ", " << report.violations.size()
      << " violations, min Hessian eigenvalue " << report.min_hessian_eigenvalue << "\n";
  return report.passed ? kExitPass : kExitNegative;
}

int cmd_smooth(const RunConfig& cfg, std::ostream& log) {
  const double delta = cfg.positive("delta", 0.2);
  const double eps = cfg.positive("eps", 0.05);
  const double lambda = cfg.positive("lambda", 0.1);
  SmoothingOptions opt;
  opt.lambda_slack = cfg.positive("lambda_slack", opt.lambda_slack);
  opt.lip_fraction = cfg.fraction("lip_fraction", opt.lip_fraction);
  opt.audit_scale = cfg.positive("audit_scale", opt.audit_scale);
  const SampledManifold graph = load_graph(cfg, 3000);
  const ScalarField f = sample_test_function(graph, cfg.require("function"));
  const SmoothingResult res = smooth_approximate(graph, f, delta, eps, lambda, cfg.seed, opt);
  std::ostringstream csv;
  write_smoothing_csv(csv, res.report);
  write_file_atomic(cfg.out_dir / "smoothing.csv", csv.str());
  nlohmann::json doc = to_json(res.report);
  doc["manifold"] = to_json(graph.spec());
  doc["samples"] = graph.size();
  doc["seed"] = cfg.seed;
  write_json(cfg.out_dir / "smoothing.json", doc);
  log << "smooth: " << (res.report.passed ? "passed" : "failed") << ", sup error " << res.report.sup_err
      << ", lip bound at " << res.report.lip_ok_fraction << " of " << res.report.resolvable
      << " resolvable samples, charts " << res.report.charts << "\n";
  return res.report.passed ? kExitPass : kExitNegative;
}

int cmd_check_hilbert(const RunConfig& cfg, std::ostream& log) {
  HilbertParams p;
  p.delta = cfg.positive("delta", p.delta);
  p.eps = cfg.positive("eps", p.eps);
  p.lambda = cfg.positive("lambda", p.lambda);
  p.rungs = cfg.positive_int("rungs", p.rungs);
  p.tol_h = cfg.positive("tol_h", p.tol_h);
  p.tol_nh = cfg.positive("tol_nh", p.tol_nh);
  p.sign_fraction = cfg.fraction("sign_fraction", p.sign_fraction);
  p.mass_fraction = cfg.fraction("mass_fraction", p.mass_fraction);
  p.min_support = cfg.positive_int("min_support", p.min_support);
  p.sandwich_fraction = cfg.fraction("sandwich_fraction", p.sandwich_fraction);
  p.mesh_relative = cfg.flag("mesh_relative", p.mesh_relative);
  p.seed = cfg.seed;
  if (p.tol_h >= p.tol_nh) throw InputError("config: parameters.tol_h must be below tol_nh");
  const SampledManifold graph = load_graph(cfg, 1200);
  const ScalarField f = sample_test_function(graph, cfg.require("f"));
  const ScalarField g = sample_test_function(graph, cfg.require("g"));
  const HilbertianityReport report = hilbertianity_check(graph, graph.measure(), f, g, p);
  std::ostringstream csv;
  write_hilbert_csv(csv, report);
  write_file_atomic(cfg.out_dir / "hilbert.csv", csv.str());
  nlohmann::json doc = to_json(report);
  doc["manifold"] = to_json(graph.spec());
  doc["samples"] = graph.size();
  doc["median_edge_length"] = graph.median_edge_length();
  doc["lambda0_effective"] = p.lambda_for(graph);
  doc["eps0_effective"] = p.eps_for(graph);
  write_json(cfg.out_dir / "hilbert.json", doc);
  log << "check-hilbert: " << to_string(report.verdict) << ", relative defect " << report.relative
      << ", support " << report.support_count << ", sandwich " << (report.sandwich_pass ? "ok" : "violated") << "\n";
  switch (report.verdict) {
    case HilbertVerdict::hilbertian_within_tol: return kExitPass;
    case HilbertVerdict::non_hilbertian: return kExitNegative;
    case HilbertVerdict::inconclusive: break;
  }
  return kExitInconclusive;
}

int cmd_quotient(const RunConfig& cfg, std::ostream& log) {
  nlohmann::json batch = nlohmann::json::object();
  if (cfg.has("instances")) {
    const auto& ref = cfg.doc["instances"];
    if (ref.is_string()) {
      fs::path path = ref.get<std::string>();
      if (path.is_relative()) path = cfg.source_dir / path;
      std::ifstream in(path);
      if (!in) throw InputError("quotient: cannot open instance file '" + path.string() + "'");
      try {
        batch = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw InputError("quotient: instance file '" + path.string() + "' is malformed: " + e.what());
      }
      if (batch.is_array()) batch = nlohmann::json{{"cases", batch}};
    } else if (ref.is_array()) {
      batch["cases"] = ref;
    } else {
      batch = ref;
    }
  }
  if (cfg.has("random")) batch["random"] = cfg.doc["random"];
  if (batch.empty()) batch["random"] = {{"count", 200}, {"seed", cfg.seed}};
  const auto cases = quotient_cases_from_json(batch);
  QuotientBatchOptions opt;
  opt.lift_tol = cfg.positive("lift_tol", opt.lift_tol);
  opt.isometry_tol = cfg.positive("isometry_tol", opt.isometry_tol);
  opt.seed = cfg.seed;
  const QuotientBatchReport report = run_quotient_batch(cases, opt);
  std::ostringstream csv;
  write_quotient_csv(csv, report);
  write_file_atomic(cfg.out_dir / "quotient.csv", csv.str());
  write_json(cfg.out_dir / "quotient.json", to_json(report));
  log << "quotient: " << report.rows.size() << " instances, " << (report.passed ? "passed" : "failed")
      << ", max gap " << report.max_gap << "\n";
  return report.passed ? kExitPass : kExitNegative;
}

int cmd_distance(const RunConfig& cfg, std::ostream& log) {
  const SampledManifold graph = load_graph(cfg, 5000);
  std::vector<std::pair<int, int>> pairs;
  if (cfg.has("pairs")) {
    try {
      for (const auto& p : cfg.doc["pairs"]) pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("config: pairs: ") + e.what());
    }
  } else {
    const int count = cfg.positive_int("pairs", 50);
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int> pick(0, graph.size() - 1);
    while (static_cast<int>(pairs.size()) < count) {
      const int a = pick(rng), b = pick(rng);
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  DijkstraWorkspace ws(graph);
  std::string csv = "src,dst,distance\n";
  std::vector<double> rel;
  char buf[96];
  for (auto [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= graph.size() || b >= graph.size()) throw InputError("config: pair index out of range");
    ws.run(a);
    const double d = ws.distance(b);
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", a, b, d);
    csv += buf;
    const double exact = graph.spec().distance(graph.point(a), graph.point(b));
    if (exact > 0.0) rel.push_back(std::abs(d - exact) / exact);
  }
  write_file_atomic(cfg.out_dir / "distance.csv", csv);
  double median = 0.0;
  if (!rel.empty()) {
    std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
    median = rel[rel.size() / 2];
  }
  write_json(cfg.out_dir / "distance.json", {{"manifold", to_json(graph.spec())},
                                             {"samples", graph.size()},
                                             {"pairs", pairs.size()},
                                             {"median_relative_error", median},
                                             {"seed", cfg.seed}});
  log << "distance: " << pairs.size() << " pairs, median relative error vs reference distance " << median << "\n";
  return kExitPass;
}

int run_command(const std::string& command, const fs::path& config_path, std::optional<fs::path> out,
                std::optional<std::uint64_t> seed, std::ostream& log) {
  try {
    const RunConfig cfg = RunConfig::load(config_path, command, seed, std::move(out));
    if (command == "validate-norm") return cmd_validate_norm(cfg, log);
    if (command == "smooth") return cmd_smooth(cfg, log);
    if (command == "check-hilbert") return cmd_check_hilbert(cfg, log);
    if (command == "quotient") return cmd_quotient(cfg, log);
    if (command == "distance") return cmd_distance(cfg, log);
    throw InputError("unknown command '" + command + "'");
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConstructionError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    log << "error: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    log << "failure: " << e.what() << "\n";
    return kExitInconclusive;
  }
}

}  // namespace finslerkit
