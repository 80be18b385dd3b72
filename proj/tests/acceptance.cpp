// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "finslerkit/metric_graph.hpp"
#include "finslerkit/minkowski.hpp"
#include "finslerkit/quotient.hpp"
#include "finslerkit/smoothing.hpp"
#include "finslerkit/sobolev.hpp"
#include "finslerkit/test_functions.hpp"

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace finslerkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

MinkowskiNorm degenerate_norm() {
  std::vector<double> h(256);
  for (size_t j = 0; j < h.size(); ++j) h[j] = std::abs(std::cos(2.0 * std::numbers::pi * j / h.size()));
  return MinkowskiNorm::custom_table(h);
}

bool has_violation(const ConvexityReport& r, const std::string& axiom) {
  return std::any_of(r.violations.begin(), r.violations.end(), [&](const auto& v) { return v.axiom == axiom; });
}

Outcome criterion1() {
  Outcome o;
  for (const auto& F : {MinkowskiNorm::euclidean(2), MinkowskiNorm::euclidean(3), MinkowskiNorm::quartic_blend(2, 0.5),
                        MinkowskiNorm::quartic_blend(3, 0.5)}) {
    const auto r = validate_minkowski(F, 10000, 1);
    o.require(r.passed && r.violations.empty() && r.min_hessian_eigenvalue > 0.0,
              to_string(F.family()) + std::to_string(F.dim()) + " min_eig=" + fmt("%.3g", r.min_hessian_eigenvalue));
  }
  const auto deg = validate_minkowski(degenerate_norm(), 10000, 1);
  o.require(!deg.passed && has_violation(deg, "positivity"), "degenerate fails positivity");
  const auto l1 = validate_minkowski(MinkowskiNorm::lp(2, 1.0), 10000, 1);
  o.require(!l1.passed && has_violation(l1, "strong_convexity"), "l1 fails strong_convexity");
  return o;
}

Outcome criterion2() {
  Outcome o;
  Rng rng(2);
  for (double p : {1.0, 2.0, 4.0}) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int dim = 2 + i % 2;
      const Vec w = random_normal(rng, dim);
      const double exact = p == 1.0 ? w.lpNorm<Eigen::Infinity>()
                                    : std::pow(w.array().abs().pow(p / (p - 1)).sum(), (p - 1) / p);
      worst = std::max(worst, std::abs(dual_norm(MinkowskiNorm::lp(dim, p), w) - exact) / exact);
    }
    o.require(worst <= 1e-3, "p=" + fmt("%g", p) + " max_rel=" + fmt("%.2e", worst));
  }
  return o;
}

double median_distance_error(int n, int k) {
  const auto g = sample_manifold(ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2)), n, {}, 1, k);
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, g.size() - 1);
  DijkstraWorkspace ws(g);
  std::vector<double> rel;
  while (rel.size() < 50) {
    const int a = pick(rng), b = pick(rng);
    const double exact = (g.point(a) - g.point(b)).norm();
    if (a == b) continue;
    ws.run(a);
    rel.push_back(std::abs(ws.distance(b) - exact) / exact);
  }
  std::nth_element(rel.begin(), rel.begin() + 25, rel.end());
  return rel[25];
}

Outcome criterion3() {
  Outcome o;
  const double e1 = median_distance_error(5000, 12);
  const double e2 = median_distance_error(20000, 12);
  o.require(e1 <= 0.05, "n=5000 median=" + fmt("%.4f", e1));
  o.require(e2 < e1, "n=20000 median=" + fmt("%.4f", e2));
  const auto s = sample_manifold(ManifoldSpec::sphere2(), 5000, {}, 1);
  int pole = 0, equator = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s.point(i)[2] > s.point(pole)[2]) pole = i;
    if (s.point(i)[0] > s.point(equator)[0]) equator = i;
  }
  DijkstraWorkspace ws(s);
  ws.run(pole);
  const double exact = s.spec().distance(s.point(pole), s.point(equator));
  const double err = std::abs(ws.distance(equator) - exact) / exact;
  o.require(err <= 0.05 && std::abs(exact - std::numbers::pi / 2) < 0.05, "sphere pole-equator rel=" + fmt("%.4f", err));
  return o;
}

Outcome criterion4() {
  Outcome o;
  struct Fixture {
    ManifoldSpec spec;
    const char* function;
  };
  for (const auto& fx : {Fixture{ManifoldSpec::euclidean(MinkowskiNorm::euclidean(2)), "cone"},
                         Fixture{ManifoldSpec::sphere2(), "truncated_distance"}}) {
    const auto g = sample_manifold(fx.spec, 3000, {}, 1);
    const auto f = sample_test_function(g, nlohmann::json(fx.function));
    const auto rep = smooth_approximate(g, f, 0.2, 0.05, 0.1, 1).report;
    int err_ok = 0;
    for (const auto& r : rep.rows) err_ok += r.err_ok;
    o.require(err_ok == static_cast<int>(rep.rows.size()) && rep.err_pass,
              std::string(fx.function) + " sup_err=" + fmt("%.2e", rep.sup_err));
    o.require(rep.lip_pass && rep.lip_ok_fraction >= 0.99,
              "lip " + fmt("%.4f", rep.lip_ok_fraction) + " of " + std::to_string(rep.resolvable) + " resolvable");
    o.require(rep.support_pass, "support");
  }
  return o;
}

struct HilbertRun {
  double relative;
  bool sandwich;
  double sandwich_fraction;
  HilbertVerdict verdict;
};

// W is independent of the measure, so one ladder serves all three measures.
std::vector<HilbertRun> hilbert_runs(const ManifoldSpec& spec, const nlohmann::json& fs, const nlohmann::json& gs,
                                     int n, const HilbertParams& p) {
  const auto g = sample_manifold(spec, n, {}, 7);
  const auto f = sample_test_function(g, fs), h = sample_test_function(g, gs);
  const auto ladder = build_wug_ladder(g, p.delta, p.eps_for(g), p.lambda_for(g), p.seed, p.rungs);
  const auto wf = wug_estimate(f, g, ladder).values, wg = wug_estimate(h, g, ladder).values;
  const auto ws = wug_estimate(f + h, g, ladder).values, wd = wug_estimate(f - h, g, ladder).values;

  MeasureSpec uniform;
  MeasureSpec smooth;
  smooth.density = MeasureSpec::Density::smooth;
  MeasureSpec mixed = smooth;
  for (const Vec& x : sample_points(spec, 150, 99)) mixed.atoms.push_back(Atom{x, 1.0 / 150});
  std::vector<HilbertRun> out;
  for (const auto& m : {uniform, smooth, mixed}) {
    const auto mu = make_measure(spec, g.points(), m);
    const auto r = hilbertianity_from_wug(mu, wf, wg, ws, wd, spec.is_riemannian(), ladder.max_r(), p);
    out.push_back({r.relative, r.sandwich_pass, r.sandwich_ok_fraction, r.verdict});
  }
  return out;
}

// Default ladder (delta, eps0, lambda0) = (0.4, 0.05, 0.2) at both levels.
HilbertParams ladder_params() { return HilbertParams{}; }

Outcome sandwich_outcome;

Outcome criterion5() {
  Outcome o;
  const HilbertParams p = ladder_params();
  const char* measures[] = {"uniform", "smooth", "mixed"};
  struct Fixture {
    const char* name;
    ManifoldSpec spec;
    nlohmann::json f, g;
  };
  const std::vector<Fixture> fixtures = {
      {"sphere2", ManifoldSpec::sphere2(), {{"name", "coordinate"}, {"index", 0}}, {{"name", "coordinate"}, {"index", 1}}},
      {"torus", ManifoldSpec::flat_torus2(), {{"name", "wave"}, {"frequencies", {1, 0}}},
       {{"name", "wave"}, {"frequencies", {0, 1}}}},
  };
  for (const auto& fx : fixtures) {
    const auto coarse = hilbert_runs(fx.spec, fx.f, fx.g, 600, p);
    const auto fine = hilbert_runs(fx.spec, fx.f, fx.g, 2400, p);
    for (int m = 0; m < 3; ++m) {
      o.require(coarse[m].relative <= 0.02 && fine[m].relative <= 0.02 && fine[m].relative < coarse[m].relative,
                std::string(fx.name) + "/" + measures[m] + " rel " + fmt("%.2e", coarse[m].relative) + "->" +
                    fmt("%.2e", fine[m].relative));
      for (const auto* r : {&coarse[m], &fine[m]})
        sandwich_outcome.require(r->sandwich && r->sandwich_fraction >= 0.99,
                                 std::string(fx.name) + "/" + measures[m] + " " + fmt("%.4f", r->sandwich_fraction));
    }
  }
  const auto g = sample_manifold(ManifoldSpec::euclidean(MinkowskiNorm::lp(2, 4.0)), 600, {}, 7);
  const auto rep = hilbertianity_check(g, g.measure(), sample_test_function(g, {{"name", "coordinate"}, {"index", 0}}),
                                       sample_test_function(g, {{"name", "coordinate"}, {"index", 1}}), p);
  const double exact = 2 * std::pow(2.0, 1.5) - 4.0;
  double worst = 0.0;
  for (double d : rep.defect) worst = std::max(worst, std::abs(d - exact) / exact);
  o.require(worst <= 0.05 && rep.verdict == HilbertVerdict::non_hilbertian,
            "l4 max per-sample dev " + fmt("%.2e", worst) + " verdict " + to_string(rep.verdict));
  return o;
}

Outcome criterion6() { return sandwich_outcome; }

Outcome criterion7() {
  Outcome o;
  const auto rep = run_quotient_batch(random_quotient_cases(200, 1));
  bool contraction = true;
  for (const auto& r : rep.rows) contraction = contraction && r.contraction_ok && r.class_norm <= r.rep_norm;
  o.require(contraction, "contraction");
  o.require(rep.max_lift_error <= 1e-8, "lift " + fmt("%.1e", rep.max_lift_error));
  o.require(rep.max_isometry_error <= 1e-6, "isometry " + fmt("%.1e", rep.max_isometry_error));

  Mat e3(3, 1);
  e3 << 0, 0, 1;
  Vec w(3);
  w << 1, 2, 3;
  const double a = project_P(QuotientInstance(MinkowskiNorm::euclidean(3), e3), w).class_norm;
  o.require(std::abs(a - std::sqrt(5.0)) <= 1e-9, "l2/span(e3) " + fmt("%.12f", a));
  Mat anti(2, 1);
  anti << 1, -1;
  const QuotientInstance linf(MinkowskiNorm::lp(2, 1.0), anti);
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vec c = random_normal(rng, 2);
    worst = std::max(worst, std::abs(project_P(linf, c).class_norm - std::abs(c[0] + c[1]) / 2));
  }
  o.require(worst <= 1e-9, "linf quotient |a+b|/2 err " + fmt("%.1e", worst));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& command, const fs::path& config, const fs::path& out) {
  const std::string cmd = std::string(FINSLERKIT_CLI) + " " + command + " --config " + config.string() + " --out " +
                          out.string() + " --seed 1 >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion8() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "finslerkit_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  struct Job {
    std::string name, command, output;
    nlohmann::json config;
  };
  const nlohmann::json fg = {{"f", {{"name", "coordinate"}, {"index", 0}}}, {"g", {{"name", "coordinate"}, {"index", 1}}}};
  nlohmann::json hilbert = fg;
  hilbert["manifold"] = "sphere2";
  hilbert["samples"] = {{"n", 600}};
  const std::vector<Job> jobs = {
      {"c1", "validate-norm", "norm_report.json", {{"norm", "quartic_blend"}, {"parameters", {{"samples", 10000}}}}},
      {"c3", "distance", "distance.csv", {{"manifold", {{"kind", "euclidean"}, {"norm", "euclidean"}}}}},
      {"c4-cone", "smooth", "smoothing.csv",
       {{"manifold", {{"kind", "euclidean"}, {"norm", "euclidean"}}}, {"function", "cone"}}},
      {"c4-sphere", "smooth", "smoothing.csv", {{"manifold", "sphere2"}, {"function", "truncated_distance"}}},
      {"c5", "check-hilbert", "hilbert.csv", hilbert},
      {"c7", "quotient", "quotient.csv", nlohmann::json::object()},
  };
  for (const auto& job : jobs) {
    const fs::path cfg = dir / (job.name + ".json");
    std::ofstream(cfg) << job.config.dump(1);
    const int a = run_cli(job.command, cfg, dir / (job.name + "_a"));
    const int b = run_cli(job.command, cfg, dir / (job.name + "_b"));
    const std::string x = slurp(dir / (job.name + "_a") / job.output), y = slurp(dir / (job.name + "_b") / job.output);
    o.require(a == b && a != 2 && !x.empty() && x == y, job.name + " " + std::to_string(x.size()) + "B exit " + std::to_string(a));
  }
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 10, criterion1},  {2, 30, criterion2},  {3, 120, criterion3}, {4, 300, criterion4},
      {5, 600, criterion5}, {6, 600, criterion6}, {7, 120, criterion7}, {8, 1e9, criterion8},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_s) o.require(false, "runtime over " + fmt("%g", c.limit_s) + " s");
    all = all && o.pass;
    std::printf("criterion %d: %s  (%.1f s)  %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
