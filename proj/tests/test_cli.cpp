#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("finslerkit_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const nlohmann::json& doc) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(1);
    return p;
  }

  int run(const std::string& command, const fs::path& config, const std::string& out = "out",
          const std::string& extra = "") const {
    const std::string cmd = std::string(FINSLERKIT_CLI) + " " + command + " --config " + config.string() + " --out " +
                            (dir_ / out).string() + " " + extra + " >" + (dir_ / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ValidateNormExitCodes) {
  EXPECT_EQ(run("validate-norm", write("e.json", {{"norm", "euclidean"}})), 0);
  EXPECT_TRUE(nlohmann::json::parse(read("out/norm_report.json"))["passed"].get<bool>());
  EXPECT_EQ(run("validate-norm", write("d.json", {{"norm", "degenerate"}})), 1);
  EXPECT_EQ(run("validate-norm", write("f.json", {{"norm", "euclidean"}, {"parameters", {{"hessian_floor", 3.0}}}}), "f"), 1);
  EXPECT_EQ(nlohmann::json::parse(read("f/norm_report.json"))["thresholds"]["hessian_floor"], 3.0);
  EXPECT_EQ(run("validate-norm", write("m.json", {{"dim", 2}})), 2);
  EXPECT_NE(read("log.txt").find("norm"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("validate-norm", dir_ / "missing.json"), 2);
  EXPECT_EQ(run("no-such-command", write("e.json", {{"norm", "euclidean"}})), 2);
  std::ofstream(dir_ / "broken.json") << "{not json";
  EXPECT_EQ(run("validate-norm", dir_ / "broken.json"), 2);
}

TEST_F(CliTest, SmoothZeroFunctionAndBadEps) {
  const nlohmann::json base = {{"manifold", {{"kind", "euclidean"}, {"norm", "euclidean"}}},
                               {"samples", {{"n", 500}}},
                               {"function", "zero"}};
  EXPECT_EQ(run("smooth", write("z.json", base)), 0);
  std::istringstream csv(read("out/smoothing.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "index,err_abs,lipa_g,lipf_ball,bound_ok,support_ok");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_NE(line.find(",true,true"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 500);
  auto bad = base;
  bad["parameters"] = {{"eps", 0}};
  EXPECT_EQ(run("smooth", write("b.json", bad)), 2);
}

TEST_F(CliTest, QuotientBatchAndInstances) {
  EXPECT_EQ(run("quotient", write("q.json", nlohmann::json::object())), 0);
  std::istringstream csv(read("out/quotient.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "id,class_norm,lift_norm,abstract_norm,concrete_norm,gap");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 200);

  write("full.json", {{"cases",
                       {{{"id", "full"},
                         {"norm", {{"family", "euclidean"}, {"dim", 2}}},
                         {"kernel", {{1, 0}, {0, 1}}},
                         {"covector", {1, 2}}}}}});
  EXPECT_EQ(run("quotient", write("qf.json", {{"instances", "full.json"}}), "full"), 0);
  EXPECT_EQ(read("full/quotient.csv"), "id,class_norm,lift_norm,abstract_norm,concrete_norm,gap\nfull,0,0,0,0,0\n");

  write("bad.json", {{"cases", {{{"norm", {{"family", "euclidean"}}}}}}});
  EXPECT_EQ(run("quotient", write("qb.json", {{"instances", "bad.json"}})), 2);
}

TEST_F(CliTest, CheckHilbertVerdicts) {
  const nlohmann::json fg = {{"f", {{"name", "coordinate"}, {"index", 0}}}, {"g", {{"name", "coordinate"}, {"index", 1}}}};
  auto sphere = fg;
  sphere["manifold"] = "sphere2";
  sphere["samples"] = {{"n", 400}};
  sphere["parameters"] = {{"mesh_relative", true}, {"lambda", 0.2}, {"eps", 0.05}};
  EXPECT_EQ(run("check-hilbert", write("s.json", sphere)), 0);

  auto l4 = sphere;
  l4["manifold"] = {{"kind", "euclidean"}, {"norm", "l4"}};
  EXPECT_EQ(run("check-hilbert", write("l4.json", l4), "l4"), 1);
  EXPECT_EQ(nlohmann::json::parse(read("l4/hilbert.json"))["verdict"], "non_hilbertian");

  auto atoms = fg;
  atoms["manifold"] = "sphere2";
  atoms["samples"] = {{"n", 400}};
  atoms["measure"] = {{"density", "none"},
                      {"atoms",
                       {{{"point", {0, 0, 1}}, {"mass", 1}},
                        {{"point", {1, 0, 0}}, {"mass", 1}},
                        {{"point", {0, 1, 0}}, {"mass", 1}}}}};
  EXPECT_EQ(run("check-hilbert", write("a.json", atoms), "atoms"), 3);
}

TEST_F(CliTest, DistanceCommand) {
  const nlohmann::json cfg = {{"manifold", {{"kind", "euclidean"}, {"norm", "euclidean"}}},
                              {"samples", {{"n", 2000}}},
                              {"parameters", {{"pairs", 10}}}};
  EXPECT_EQ(run("distance", write("d.json", cfg)), 0);
  const std::string csv = read("out/distance.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "src,dst,distance");
}

TEST_F(CliTest, ByteIdenticalReruns) {
  const nlohmann::json smooth = {{"manifold", "sphere2"},
                                 {"samples", {{"n", 800}}},
                                 {"function", {{"name", "truncated_distance"}}}};
  const auto p = write("s.json", smooth);
  ASSERT_EQ(run("smooth", p, "a", "--seed 5"), 0);
  ASSERT_EQ(run("smooth", p, "b", "--seed 5"), 0);
  EXPECT_EQ(read("a/smoothing.csv"), read("b/smoothing.csv"));
  EXPECT_FALSE(read("a/smoothing.csv").empty());

  const auto q = write("q.json", {{"random", {{"count", 30}}}});
  ASSERT_EQ(run("quotient", q, "qa", "--seed 9"), 0);
  ASSERT_EQ(run("quotient", q, "qb", "--seed 9"), 0);
  EXPECT_EQ(read("qa/quotient.csv"), read("qb/quotient.csv"));
}
