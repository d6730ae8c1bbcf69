#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drcc/errors.hpp"
#include "drcc/validation.hpp"
#include "oracles.hpp"

using namespace drcc;

namespace {

struct Small {
  NetworkCase net = oracle::small_wind_case(2);
  CompactProblem problem;
  PartitionSpec partition;
  GeneratorConfig gen;

  Small() {
    problem = build_compact(net, {Contingency::intact(), Contingency::gen_out(0), parse_contingency(net, "line:1-2")},
                            0.05);
    partition = box_partition(net, {{0, 1}});
    gen.mean = Eigen::Vector2d(20, 20);
    gen.groups = {{0, 1}};
    Eigen::Matrix2d cov;
    cov << 16, 12, 12, 16;
    gen.covariance = {cov};
    gen.lower = Eigen::Vector2d(10, 10);
    gen.upper = Eigen::Vector2d(30, 30);
    gen.columns = sample_columns(net);
  }
};

// Direct count with evaluate_row, one sample and row at a time.
double brute_frequency(const CompactProblem& p, const Eigen::VectorXd& x, const SampleSet& s) {
  int bad = 0;
  for (Eigen::Index m = 0; m < s.size(); ++m) {
    bool any = false;
    for (std::size_t k = 0; k < p.K() && !any; ++k) any = evaluate_row(p, k, x, s.sample(m)) > kViolationTol;
    bad += any;
  }
  return static_cast<double>(bad) / static_cast<double>(s.size());
}

MethodReport report(const std::string& m, double cost) {
  MethodReport r;
  r.method = m;
  r.cost = cost;
  return r;
}

}  // namespace

TEST(ViolationFrequency, WorstCaseIsNeverViolatedInSupport) {
  Small s;
  const DispatchSolution wc = solve_worstcase(s.problem, s.partition);
  // include the support corners, where the robust rows are tight
  SampleSet v = generate_samples(s.gen, 3000, 5);
  v.samples.conservativeResize(v.size() + 4, Eigen::NoChange);
  v.samples.bottomRows(4) << 10, 10, 10, 30, 30, 10, 30, 30;
  const ViolationReport r = violation_frequency(s.problem, wc.x, v);
  EXPECT_EQ(r.n_violated, 0);
  EXPECT_EQ(r.violation_frequency, 0.0);
}

TEST(ViolationFrequency, ScenarioIsFeasibleInSample) {
  Small s;
  const SampleSet train = generate_samples(s.gen, 30, 6);
  const DispatchSolution sc = solve_scenario(s.problem, train);
  EXPECT_EQ(violation_frequency(s.problem, sc.x, train).violation_frequency, 0.0);
}

TEST(ViolationFrequency, MatchesBruteForceAndBreakdown) {
  Small s;
  SampleSet one;
  one.samples = s.problem.forecast.transpose();
  const DispatchSolution naive = solve_scenario(s.problem, one);
  const SampleSet v = generate_samples(s.gen, 2500, 7);  // spans more than one chunk
  const ViolationReport r = violation_frequency(s.problem, naive.x, v);
  EXPECT_GT(r.n_violated, 0);
  EXPECT_DOUBLE_EQ(r.violation_frequency, brute_frequency(s.problem, naive.x, v));
  for (auto c : r.family_counts) EXPECT_LE(c, r.n_violated);
  EXPECT_LE(r.worst_contingencies.size(), 5u);
  for (std::size_t i = 1; i < r.worst_contingencies.size(); ++i)
    EXPECT_GE(r.worst_contingencies[i - 1].second, r.worst_contingencies[i].second);
}

TEST(ViolationFrequency, EmptyAndMismatched) {
  Small s;
  const DispatchSolution wc = solve_worstcase(s.problem, s.partition);
  SampleSet empty;
  empty.samples.resize(0, 2);
  EXPECT_EQ(violation_frequency(s.problem, wc.x, empty).n_validation, 0);
  SampleSet wide;
  wide.samples = Eigen::MatrixXd::Constant(3, 5, 20.0);
  EXPECT_THROW(violation_frequency(s.problem, wc.x, wide), DimensionMismatch);
  EXPECT_THROW(violation_frequency(s.problem, Eigen::VectorXd::Zero(3), empty), DimensionMismatch);
}

TEST(CompareMethods, IdentityCases) {
  const std::string header = "method,theta,cost,violation_freq,n_validation\n";
  EXPECT_EQ(comparison_csv(compare_methods({})), header);
  const auto one = compare_methods({report("drpoly", 10.0)});
  ASSERT_EQ(one.size(), 1u);
  const std::string csv = comparison_csv(one);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  const auto tie = compare_methods({report("b", 5.0), report("a", 5.0), report("c", 1.0)});
  EXPECT_EQ(tie[0].method, "c");
  EXPECT_EQ(tie[1].method, "b");
  EXPECT_EQ(tie[2].method, "a");
}

TEST(Aggregate, MeanAndSampleStd) {
  std::vector<SweepRecord> recs;
  for (int r = 0; r < 3; ++r) {
    SweepRecord a{"drpoly", 0.01, r, 100.0 + r, 0.01 * r, 4, "optimal"};
    recs.push_back(a);
  }
  recs.push_back({"drpoly", 0.1, 0, std::nan(""), std::nan(""), 0, "budget_infeasible"});
  const auto tables = aggregate(recs);
  ASSERT_EQ(tables.size(), 1u);
  ASSERT_EQ(tables[0].rows.size(), 2u);
  const auto& row = tables[0].rows[0];
  EXPECT_DOUBLE_EQ(row.theta, 0.01);
  EXPECT_DOUBLE_EQ(row.mean_cost, 101.0);
  EXPECT_NEAR(row.cost_std, 1.0, 1e-12);
  EXPECT_EQ(row.n_repeats, 3);
  EXPECT_EQ(tables[0].rows[1].n_repeats, 0);
  EXPECT_TRUE(std::isnan(tables[0].rows[1].mean_cost));
}

TEST(ParetoSweep, SingletonAndOrdering) {
  Small s;
  SweepConfig cfg;
  cfg.partition = s.partition;
  cfg.generator = s.gen;
  cfg.n_train = 20;
  cfg.n_validation = 500;
  cfg.thetas = {1e-3};
  cfg.kappas = {1};
  cfg.repeats = 1;
  cfg.seed = 3;
  const SweepResult res = pareto_sweep(s.problem, cfg);
  ASSERT_EQ(res.records.size(), 3u);
  EXPECT_EQ(res.records[0].method, "drpoly");
  EXPECT_EQ(res.records[1].method, "drbox");
  EXPECT_EQ(res.records[2].method, "scenario");
  EXPECT_TRUE(std::isnan(res.records[2].theta));
  EXPECT_EQ(res.records[0].n_dr, 3u);
  EXPECT_EQ(res.records[1].n_dr, 2u);
  ASSERT_EQ(res.tables.size(), 3u);
  for (const auto& t : res.tables) EXPECT_EQ(t.rows.size(), 1u);
  const std::string csv = pareto_csv(res.records);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,theta,repeat,cost,violation_freq,n_dr,status");
}

TEST(ParetoSweep, TrendsAndDeterminism) {
  Small s;
  SweepConfig cfg;
  cfg.partition = s.partition;
  cfg.generator = s.gen;
  cfg.n_train = 30;
  cfg.n_validation = 2000;
  cfg.thetas = {0.1, 1e-3, 1e-2};  // sorted internally
  cfg.kappas = {1};
  cfg.repeats = 2;
  cfg.seed = 4;
  const SweepResult a = pareto_sweep(s.problem, cfg);
  cfg.jobs = 3;
  const SweepResult b = pareto_sweep(s.problem, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].status, b.records[i].status);
    if (a.records[i].status == "optimal") EXPECT_EQ(a.records[i].cost, b.records[i].cost);
  }
  for (const auto& t : a.tables) {
    if (t.method == "scenario") continue;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      EXPECT_LT(t.rows[i - 1].theta, t.rows[i].theta);
      if (t.rows[i].n_repeats == 2 && t.rows[i - 1].n_repeats == 2)
        EXPECT_LE(t.rows[i - 1].mean_cost, t.rows[i].mean_cost + 1e-9) << t.method;
    }
  }
}

TEST(ParetoSweep, RejectsEmptyValidation) {
  Small s;
  SweepConfig cfg;
  cfg.partition = s.partition;
  cfg.generator = s.gen;
  cfg.thetas = {1e-3};
  cfg.kappas = {0};
  cfg.n_validation = 0;
  EXPECT_THROW(pareto_sweep(s.problem, cfg), TooFewSamples);
  cfg.n_validation = 10;
  cfg.repeats = 0;
  EXPECT_THROW(pareto_sweep(s.problem, cfg), ValidationError);
}

TEST(Seeds, TrainingAndValidationStreamsAreDistinct) {
  EXPECT_NE(training_seed(1, 0), validation_seed(1));
  EXPECT_NE(training_seed(1, 0), training_seed(1, 1));
  EXPECT_EQ(training_seed(9, 4), training_seed(9, 4));
}
