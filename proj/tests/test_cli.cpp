// Runs the drcc binary end to end and checks exit codes and outputs.
#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drcc/dr_set.hpp"
#include "drcc/uncertainty.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("drcc_cli_" + std::to_string(::getpid()) + "_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args, std::string* log = nullptr) const {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(DRCC_BIN) + " " + args + " >/dev/null 2>" + err.string();
    const int rc = std::system(cmd.c_str());
    if (log) *log = slurp(err);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  fs::path write(const std::string& name, const json& doc) const {
    std::ofstream(dir / name) << doc.dump(2);
    return dir / name;
  }

  // Small three-bus case with two wind units and a config pointing at it.
  fs::path small_config(json extra = json::object(), double lo = 10.0, double hi = 30.0) const {
    json c = drcc::to_json(oracle::small_wind_case(2));
    for (auto& w : c["wind_units"]) {
      w["support_lower"] = lo;
      w["support_upper"] = hi;
      if (lo == hi) w["forecast"] = lo;
    }
    write("case.json", c);
    json cfg = {{"case", "case.json"},
                {"contingencies", {"intact", "gen:g1", "line:1-2"}},
                {"partition", json::array({json::array({"w1", "w2"})})},
                {"samples", {{"n", 20}}},
                {"generator", {{"covariance", {{"diagonal", 16.0}, {"off_diagonal", 12.0}}}}},
                {"validation", {{"n", 500}}},
                {"output", "out"}};
    cfg.update(extra);
    return write("config.json", cfg);
  }
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  const auto cfg = small_config();
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("solve --config " + cfg.string() + " --method magic --seed 1"), 2);
  EXPECT_EQ(run("validate --config " + cfg.string()), 2);      // --solution missing
  EXPECT_EQ(run("solve --config " + cfg.string() + " --method drbox"), 2);  // no seed, no samples
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ModelErrorsExitOne) {
  std::string log;
  EXPECT_EQ(run("solve --config " + small_config(json{{"partition", json::array({json::array({"w1", "w7"})})}}).string() + " --seed 1", &log), 1);
  EXPECT_NE(log.find("partition"), std::string::npos) << log;
  EXPECT_EQ(run("build-set --config " + small_config().string() + " --seed 1 --kappa 2"), 1);  // kappa out of range
}

TEST_F(Cli, GenSamplesHeaderOnlyAndDeterministic) {
  const auto cfg = small_config();
  ASSERT_EQ(run("gen-samples --config " + cfg.string() + " --seed 3 --count 0 --out " + (dir / "e.csv").string()), 0);
  EXPECT_EQ(drcc::read_samples_csv(dir / "e.csv").size(), 0);
  const std::string text = slurp(dir / "e.csv");
  EXPECT_NE(text.find("# drcc"), std::string::npos);
  EXPECT_NE(text.find("w_1,w_2"), std::string::npos);

  ASSERT_EQ(run("gen-samples --config " + cfg.string() + " --seed 3 --out " + (dir / "a.csv").string()), 0);
  ASSERT_EQ(run("gen-samples --config " + cfg.string() + " --seed 3 --out " + (dir / "b.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(drcc::read_samples_csv(dir / "a.csv").size(), 20);
}

TEST_F(Cli, GenSamplesExperimentGenerator) {
  const std::string cfg = std::string(DRCC_SOURCE_DIR) + "/config/rts24_experiment.json";
  ASSERT_EQ(run("gen-samples --config " + cfg + " --seed 8 --count 2000 --out " + (dir / "s.csv").string()), 0);
  const auto s = drcc::read_samples_csv(dir / "s.csv");
  ASSERT_EQ(s.size(), 2000);
  ASSERT_EQ(s.dim(), 6);
  EXPECT_GE(s.samples.minCoeff(), 80.0);
  EXPECT_LE(s.samples.maxCoeff(), 120.0);
  EXPECT_NEAR(s.samples.mean(), 100.0, 0.5);
}

TEST_F(Cli, BuildSetBoxAndPolytope) {
  const auto cfg = small_config();
  ASSERT_EQ(run("build-set --config " + cfg.string() + " --seed 2 --kappa 0 --out " + (dir / "box.json").string()), 0);
  const auto box = drcc::robust_set_from_json(json::parse(slurp(dir / "box.json")));
  EXPECT_EQ(box.q(), 4);
  for (Eigen::Index r = 0; r < box.q(); ++r) EXPECT_EQ(box.G.row(r).cwiseAbs().sum(), 1.0);
  const auto doc = json::parse(slurp(dir / "box.json"));
  EXPECT_EQ(doc["version"], "1.0.0");
  EXPECT_TRUE(doc.contains("config_hash"));

  // 2-D correlated points in the style of the illustrative figure
  drcc::SampleSet pts;
  pts.columns = {"w_1", "w_2"};
  pts.samples.resize(7, 2);
  pts.samples << 16.0, 16.4, 18.2, 18.8, 20.0, 19.4, 21.2, 22.2, 22.6, 22.0, 19.2, 20.4, 24.0, 24.6;
  drcc::write_samples_csv(dir / "fig.csv", pts);
  ASSERT_EQ(run("build-set --config " + cfg.string() + " --samples " + (dir / "fig.csv").string() +
                " --kappa 1 --epsilon 0.3 --theta 0.001 --out " + (dir / "poly.json").string()),
            0);
  const auto poly = drcc::robust_set_from_json(json::parse(slurp(dir / "poly.json")));
  EXPECT_EQ(poly.slabs.size(), 3u);
  for (Eigen::Index m = 0; m < 7; ++m) EXPECT_TRUE(((poly.G * pts.sample(m) - poly.g).array() <= 0.0).all()) << m;
}

TEST_F(Cli, BuildSetHugeThetaFails) {
  std::string log;
  EXPECT_EQ(run("build-set --config " + small_config().string() + " --seed 2 --theta 1000", &log), 1);
  EXPECT_NE(log.find("budget"), std::string::npos) << log;
}

TEST_F(Cli, WorstCaseOnPointSupportMatchesScenario) {
  const auto cfg = small_config(json::object(), 20.0, 20.0);
  drcc::SampleSet one;
  one.columns = {"w_1", "w_2"};
  one.samples = Eigen::RowVector2d(20.0, 20.0);
  drcc::write_samples_csv(dir / "one.csv", one);
  ASSERT_EQ(run("solve --config " + cfg.string() + " --method worstcase --out " + (dir / "wc.json").string()), 0);
  ASSERT_EQ(run("solve --config " + cfg.string() + " --method scenario --samples " + (dir / "one.csv").string() +
                " --out " + (dir / "sc.json").string()),
            0);
  const double wc = json::parse(slurp(dir / "wc.json"))["cost"];
  const double sc = json::parse(slurp(dir / "sc.json"))["cost"];
  EXPECT_NEAR(wc, sc, 1e-7 * std::abs(sc));
}

TEST_F(Cli, SolveValidateAndDump) {
  // with 20 samples each slab is about the sample range and a fresh draw
  // leaves one of three slabs about 28% of the time; 200 samples tighten that
  const auto cfg = small_config(json{{"samples", {{"n", 200}}}});
  ASSERT_EQ(run("solve --config " + cfg.string() + " --method drpoly --kappa 1 --seed 5 --out " +
                (dir / "sol.json").string() + " --dump-lp " + (dir / "lp.txt").string()),
            0);
  const auto sol = json::parse(slurp(dir / "sol.json"));
  EXPECT_EQ(sol["method"], "drpoly");
  EXPECT_TRUE(sol["audit"]["passed"].get<bool>());
  EXPECT_NE(slurp(dir / "lp.txt").find("reserve_up"), std::string::npos);

  ASSERT_EQ(run("validate --config " + cfg.string() + " --seed 5 --solution " + (dir / "sol.json").string() +
                " --out " + (dir / "val.json").string()),
            0);
  const auto val = json::parse(slurp(dir / "val.json"));
  EXPECT_EQ(val["n_validation"], 500);
  EXPECT_LE(val["violation_frequency"].get<double>(), 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / 500.0));

  drcc::SampleSet empty;
  empty.columns = {"w_1", "w_2"};
  empty.samples.resize(0, 2);
  drcc::write_samples_csv(dir / "empty.csv", empty);
  EXPECT_EQ(run("validate --config " + cfg.string() + " --solution " + (dir / "sol.json").string() + " --samples " +
                (dir / "empty.csv").string()),
            1);
}

TEST_F(Cli, Rts24SmokeRunPassesAudit) {
  const std::string cfg = std::string(DRCC_SOURCE_DIR) + "/config/rts24_experiment.json";
  ASSERT_EQ(run("solve --config " + cfg + " --method drbox --seed 7 --out " + (dir / "sol.json").string()), 0);
  const auto sol = json::parse(slurp(dir / "sol.json"));
  EXPECT_TRUE(sol["audit"]["passed"].get<bool>());
  EXPECT_EQ(sol["audit"]["rows_checked"], 200);
}

TEST_F(Cli, ParetoOutputsAndEmptyValidation) {
  const auto cfg = small_config(json{{"thetas", {0.001, 0.01}}, {"repeats", 2}, {"kappa", {1}}});
  ASSERT_EQ(run("pareto --config " + cfg.string() + " --seed 9 --out " + (dir / "p").string()), 0);
  const std::string summary = slurp(dir / "p" / "summary.csv");
  EXPECT_NE(summary.find("method,theta,mean_cost"), std::string::npos);
  EXPECT_NE(slurp(dir / "p" / "pareto.csv").find("scenario"), std::string::npos);

  const auto none = small_config(json{{"thetas", {0.001}}, {"validation", {{"n", 0}}}});
  std::string log;
  EXPECT_EQ(run("pareto --config " + none.string() + " --seed 9 --out " + (dir / "q").string(), &log), 1);
  EXPECT_NE(log.find("empty"), std::string::npos) << log;
}
