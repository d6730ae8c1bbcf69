#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "drcc/errors.hpp"
#include "drcc/uncertainty.hpp"
#include "oracles.hpp"

using namespace drcc;

namespace {

SampleSet make(std::initializer_list<std::initializer_list<double>> rows) {
  SampleSet s;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(rows.begin()->size());
  s.samples.resize(n, k);
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) s.samples(i, j++) = v;
    ++i;
  }
  for (Eigen::Index j = 0; j < k; ++j) s.columns.push_back("w_" + std::to_string(j + 1));
  return s;
}

Eigen::MatrixXd pattern(Eigen::Index k, double diag, double off) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, off);
  m.diagonal().setConstant(diag);
  return m;
}

// The experiment generator: mean 100, 20/16 covariance, truncation [80, 120].
GeneratorConfig experiment_generator(std::vector<IndexGroup> groups, Eigen::Index dim) {
  GeneratorConfig g;
  g.mean = Eigen::VectorXd::Constant(dim, 100.0);
  g.lower = Eigen::VectorXd::Constant(dim, 80.0);
  g.upper = Eigen::VectorXd::Constant(dim, 120.0);
  for (const auto& grp : groups) g.covariance.push_back(pattern(static_cast<Eigen::Index>(grp.size()), 20.0, 16.0));
  g.groups = std::move(groups);
  for (Eigen::Index j = 0; j < dim; ++j) g.columns.push_back("w_" + std::to_string(j));
  return g;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("drcc_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Covariance, TwoPoints) {
  const SampleSet s = make({{0, 0}, {2, 2}});
  const Eigen::MatrixXd c = empirical_covariance(s, {0, 1});
  EXPECT_TRUE(c.isApprox(Eigen::MatrixXd::Ones(2, 2), 1e-15));
}

TEST(Covariance, IdenticalSamplesGiveZero) {
  const SampleSet s = make({{3, 4}, {3, 4}, {3, 4}});
  EXPECT_EQ(empirical_covariance(s, {0, 1}), Eigen::MatrixXd::Zero(2, 2));
  EXPECT_THROW(empirical_covariance(make({{1, 2}}), {0, 1}), TooFewSamples);
}

TEST(Covariance, MonteCarloMatchesGenerator) {
  const auto gen = experiment_generator({{0, 1, 2}}, 3);
  const SampleSet s = generate_samples(gen, 10000, 41);
  const Eigen::MatrixXd c = empirical_covariance(s, {0, 1, 2});
  EXPECT_LT((c - pattern(3, 20.0, 16.0)).cwiseAbs().maxCoeff(), 1.5) << c;
}

TEST(SymmetricEig, Diagonal) {
  Eigen::MatrixXd m(2, 2);
  m << 2, 0, 0, 1;
  const auto e = symmetric_eig(m);
  EXPECT_NEAR(e.values[0], 1.0, 1e-12);
  EXPECT_NEAR(e.values[1], 2.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0, 1e-12);
}

TEST(SymmetricEig, RankOne) {
  const auto e = symmetric_eig(Eigen::MatrixXd::Ones(2, 2));
  EXPECT_NEAR(e.values[0], 0.0, 1e-12);
  EXPECT_NEAR(e.values[1], 2.0, 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), r, 1e-12);
  EXPECT_NEAR(e.vectors(0, 0) * e.vectors(1, 0), -0.5, 1e-12);
  EXPECT_NEAR(e.vectors(0, 1) * e.vectors(1, 1), 0.5, 1e-12);
}

TEST(SymmetricEig, ExperimentCovariance) {
  // det(M - t I) = (4 - t)^2 (52 - t) for the 20/16 pattern.
  const auto e = symmetric_eig(pattern(3, 20.0, 16.0));
  EXPECT_NEAR(e.values[0], 4.0, 1e-9);
  EXPECT_NEAR(e.values[1], 4.0, 1e-9);
  EXPECT_NEAR(e.values[2], 52.0, 1e-9);
  const Eigen::Vector3d ones = Eigen::Vector3d::Ones() / std::sqrt(3.0);
  EXPECT_NEAR(std::abs(e.vectors.col(2).dot(ones)), 1.0, 1e-9);
  EXPECT_NEAR(e.vectors.col(0).dot(ones), 0.0, 1e-9);
  EXPECT_NEAR(e.vectors.col(1).dot(ones), 0.0, 1e-9);
}

TEST(SymmetricEig, Rejects) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(symmetric_eig(m), NotSymmetric);
}

TEST(SymmetricEigProperty, RandomPsdReconstruction) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> nd;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 6);
    Eigen::MatrixXd a(k, k + 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    const Eigen::MatrixXd m = a * a.transpose();
    const auto e = symmetric_eig(m);
    const Eigen::MatrixXd& V = e.vectors;
    EXPECT_LT((V.transpose() * V - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((V * e.values.asDiagonal() * V.transpose() - m).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index j = 0; j < k; ++j) {
      EXPECT_LT((m * V.col(j) - e.values[j] * V.col(j)).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_GE(e.values[j], -1e-9);
      if (j > 0) EXPECT_LE(e.values[j - 1], e.values[j]);
    }
  }
}

TEST(GenerateSamples, ZeroCovarianceReturnsMean) {
  auto gen = experiment_generator({{0, 1, 2}}, 3);
  gen.covariance[0].setZero();
  const SampleSet s = generate_samples(gen, 20, 3);
  EXPECT_EQ(s.samples, Eigen::MatrixXd::Constant(20, 3, 100.0));
}

TEST(GenerateSamples, WithinTruncationAndDeterministic) {
  const auto gen = experiment_generator({{0, 1, 2}, {3, 4, 5}}, 6);
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    const SampleSet s = generate_samples(gen, 50, seed);
    EXPECT_GE(s.samples.minCoeff(), 80.0);
    EXPECT_LE(s.samples.maxCoeff(), 120.0);
    EXPECT_EQ(s.samples, generate_samples(gen, 50, seed).samples);
  }
  EXPECT_NE(generate_samples(gen, 5, 1).samples, generate_samples(gen, 5, 2).samples);
  EXPECT_EQ(generate_samples(gen, 0, 1).size(), 0);
}

TEST(GenerateSamples, GroupsAreIndependent) {
  const auto gen = experiment_generator({{0, 1, 2}, {3, 4, 5}}, 6);
  const SampleSet s = generate_samples(gen, 20000, 61);
  Eigen::MatrixXd X = s.samples;
  X.rowwise() -= X.colwise().mean();
  const Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(X.rows());
  for (int i = 0; i < 3; ++i) {
    for (int j = 3; j < 6; ++j) EXPECT_LT(std::abs(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j))), 0.03);
    EXPECT_GT(cov(i, (i + 1) % 3) / std::sqrt(cov(i, i) * cov((i + 1) % 3, (i + 1) % 3)), 0.7);
  }
}

TEST(GenerateSamples, StallGuard) {
  auto gen = experiment_generator({{0}}, 1);
  gen.covariance[0](0, 0) = 400.0;
  gen.lower[0] = 150.0;  // ~2.5 sigma out, then a sliver
  gen.upper[0] = 150.00001;
  EXPECT_THROW(generate_samples(gen, 1, 1), RejectionStall);
}

TEST(ProjectSamples, Examples) {
  const SampleSet s = make({{0, 0}, {2, 2}});
  const Eigen::VectorXd axis = project_samples(s, {0, 1}, Eigen::Vector2d(0, 1));
  EXPECT_EQ(axis, s.samples.col(1));
  const Eigen::VectorXd diag = project_samples(s, {0, 1}, Eigen::Vector2d(1, 1) / std::sqrt(2.0));
  EXPECT_NEAR(diag[0], 0.0, 1e-15);
  EXPECT_NEAR(diag[1], 2.0 * std::sqrt(2.0), 1e-12);
  const Eigen::VectorXd neg = project_samples(s, {0, 1}, -Eigen::Vector2d(1, 1) / std::sqrt(2.0));
  EXPECT_EQ(neg, -diag);
  EXPECT_THROW(project_samples(s, {0, 1}, Eigen::Vector3d(1, 0, 0)), DimensionMismatch);
}

TEST(Partition, BoxSupportAndValidation) {
  const PartitionSpec p = box_partition({{0, 2}, {1}}, Eigen::Vector3d(0, 1, 2), Eigen::Vector3d(4, 5, 6));
  EXPECT_NO_THROW(validate_partition(p, 3));
  const auto [lo, hi] = support_range(p, 0, Eigen::Vector2d(1, -1) / std::sqrt(2.0));
  EXPECT_NEAR(lo, (0.0 - 6.0) / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(hi, (4.0 - 2.0) / std::sqrt(2.0), 1e-9);

  const PartitionSpec overlap = box_partition({{0, 1}, {1}}, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  EXPECT_THROW(validate_partition(overlap, 2), ValidationError);
  const PartitionSpec gap = box_partition({{0}}, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  EXPECT_THROW(validate_partition(gap, 2), ValidationError);

  PartitionSpec unbounded = box_partition({{0}}, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  unbounded.Gamma[0] = Eigen::MatrixXd::Ones(1, 1);
  unbounded.rho[0] = Eigen::VectorXd::Ones(1);
  EXPECT_THROW(validate_partition(unbounded, 1), ValidationError);
}

TEST(Partition, CheckSupportListsOffenders) {
  const PartitionSpec p = box_partition({{0, 1}}, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  EXPECT_NO_THROW(check_support(make({{0.5, 0.5}, {1, 0}}), p));
  try {
    check_support(make({{0.5, 0.5}, {2, 0}, {0, 0}, {0, -1}}), p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("[1,3]"), std::string::npos) << e.what();
  }
}

TEST(SamplesCsv, RoundTripIsExact) {
  const auto gen = experiment_generator({{0, 1, 2}}, 3);
  const SampleSet s = generate_samples(gen, 25, 71);
  const auto path = temp_file("rt.csv");
  write_samples_csv(path, s, {"drcc test", "seed 71"});
  const SampleSet back = read_samples_csv(path);
  EXPECT_EQ(back.columns, s.columns);
  EXPECT_EQ(back.samples, s.samples);
  std::filesystem::remove(path);
}

TEST(SamplesCsv, HeaderOnlyAndErrors) {
  const auto path = temp_file("bad.csv");
  {
    std::ofstream os(path);
    os << "# comment\nw_1,w_2\n";
  }
  EXPECT_EQ(read_samples_csv(path).size(), 0);
  {
    std::ofstream os(path);
    os << "w_1,w_2\n1,abc\n";
  }
  EXPECT_THROW(read_samples_csv(path), ParseError);
  {
    std::ofstream os(path);
    os << "w_1,w_2\n1\n";
  }
  EXPECT_THROW(read_samples_csv(path), ParseError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_samples_csv(path), ParseError);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_EQ(derive_seed(5, 1), derive_seed(5, 1));
  EXPECT_NE(derive_seed(5, 1), derive_seed(5, 2));
  EXPECT_NE(derive_seed(5, 1), derive_seed(6, 1));
}
