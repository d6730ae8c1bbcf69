#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "drcc/dr_set.hpp"
#include "drcc/errors.hpp"
#include "oracles.hpp"

using namespace drcc;

namespace {

SampleSet from_matrix(const Eigen::MatrixXd& m) {
  SampleSet s;
  s.samples = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) s.columns.push_back("w_" + std::to_string(j + 1));
  return s;
}

PartitionSpec box(Eigen::Index k, double lo, double hi) {
  IndexGroup g;
  for (Eigen::Index j = 0; j < k; ++j) g.push_back(static_cast<std::size_t>(j));
  return box_partition({g}, Eigen::VectorXd::Constant(k, lo), Eigen::VectorXd::Constant(k, hi));
}

// Correlated 2-D data in the spirit of the illustrative figure.
SampleSet fig1_samples() {
  Eigen::MatrixXd m(7, 2);
  m << 3.0, 3.2, 4.1, 4.4, 5.0, 4.7, 5.6, 6.1, 6.3, 6.0, 4.6, 5.2, 7.0, 7.3;
  return from_matrix(m);
}

// t required on the mean-anchored path for each sample to be inside [L, U].
std::vector<double> path_requirements(const Eigen::VectorXd& proj, double L, double U) {
  const double a = proj.mean();
  std::vector<double> t;
  for (Eigen::Index m = 0; m < proj.size(); ++m)
    t.push_back(proj[m] >= a ? (proj[m] - a) / (U - a) : (a - proj[m]) / (a - L));
  std::sort(t.rbegin(), t.rend());
  return t;
}

}  // namespace

TEST(SelectNormals, AxisOnly) {
  EigBasis b{{{Eigen::Vector3d(1, 2, 3), Eigen::Matrix3d::Identity()}}};
  const auto n = select_normals(b, 0, 0);
  ASSERT_EQ(n.size(), 3u);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(n[j], Eigen::VectorXd::Unit(3, j));
  EXPECT_THROW(select_normals(b, 0, 3), KappaOutOfRange);
  EXPECT_THROW(select_normals(b, 0, -1), KappaOutOfRange);
}

TEST(SelectNormals, TwoDimensionalKappaOne) {
  const SampleSet s = fig1_samples();
  const auto basis = eig_basis(s, box(2, 0.0, 10.0));
  const auto n = select_normals(basis, 0, 1);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_NEAR(n[2].norm(), 1.0, 1e-12);
  // the smallest-variance direction of positively correlated data is anti-diagonal
  EXPECT_LT(n[2][0] * n[2][1], 0.0);
}

TEST(SelectNormals, ExperimentCovarianceEigenvectors) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Constant(16.0);
  cov.diagonal().setConstant(20.0);
  const EigBasis b{{symmetric_eig(cov)}};
  const auto n = select_normals(b, 0, 2);
  ASSERT_EQ(n.size(), 5u);
  const Eigen::Vector3d ones = Eigen::Vector3d::Ones() / std::sqrt(3.0);
  EXPECT_NEAR(n[3].dot(ones), 0.0, 1e-9);
  EXPECT_NEAR(n[4].dot(ones), 0.0, 1e-9);
  EXPECT_NEAR(n[3].dot(n[4]), 0.0, 1e-9);
}

TEST(HyperplaneDistance, Examples) {
  const PartitionSpec p = box(2, 0.0, 4.0);
  EXPECT_NEAR(hyperplane_distance(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 0), 3.0, p.Gamma[0], p.rho[0]), 2.0,
              1e-9);
  EXPECT_TRUE(std::isinf(hyperplane_distance(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 0), 5.0, p.Gamma[0], p.rho[0])));

  // x1 + x2 = 6 inside [0,4]^2 is the segment (2,4)-(4,2); brute force over it.
  const Eigen::Vector2d n = Eigen::Vector2d(1, 1) / std::sqrt(2.0);
  double brute = oracle::kInf;
  for (int i = 0; i <= 20000; ++i) {
    const double x1 = 2.0 + 2.0 * i / 20000.0;
    brute = std::min(brute, std::abs(x1) + std::abs(6.0 - x1));
  }
  EXPECT_NEAR(brute, 6.0, 1e-12);
  EXPECT_NEAR(hyperplane_distance(Eigen::Vector2d(0, 0), n, 3.0 * std::sqrt(2.0), p.Gamma[0], p.rho[0]), brute, 1e-9);
}

TEST(HyperplaneDistanceProperty, MatchesGreedyKnapsackOnBoxes) {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd;
  for (int inst = 0; inst < 200; ++inst) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 4);
    Eigen::VectorXd lo(k), hi(k), s(k), n(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      lo[j] = -5.0 * u(rng);
      hi[j] = 5.0 * u(rng) + 0.1;
      s[j] = lo[j] + (hi[j] - lo[j]) * u(rng);
      n[j] = nd(rng);
    }
    n.normalize();
    IndexGroup g;
    for (Eigen::Index j = 0; j < k; ++j) g.push_back(static_cast<std::size_t>(j));
    const PartitionSpec p = box_partition({g}, lo, hi);
    const double b = n.dot(s) + 4.0 * nd(rng);
    const double expect = oracle::box_hyperplane_distance(s, n, b, lo, hi);
    const double got = hyperplane_distance(s, n, b, p.Gamma[0], p.rho[0]);
    if (std::isinf(expect)) {
      EXPECT_TRUE(std::isinf(got)) << inst;
    } else {
      EXPECT_NEAR(got, expect, 1e-8 * (1.0 + expect)) << inst;
    }
  }
}

TEST(WorstCaseProb, Examples) {
  EXPECT_EQ(worst_case_violation_prob(Eigen::Vector3d(0.5, 1.0, 2.0), 0.0), 0.0);
  EXPECT_GE(worst_case_violation_prob(Eigen::Vector4d(0.0, 1.0, 2.0, 3.0), 0.01), 0.25);
  const Eigen::Vector2d d(1.0, 2.0);
  EXPECT_NEAR(worst_case_violation_prob(d, 0.1), 0.1, 1e-12);
  EXPECT_NEAR(oracle::wc_prob_grid(d, 0.1), 0.1, 1e-12);
  EXPECT_EQ(worst_case_violation_prob(Eigen::Vector2d(1.0, 2.0), 100.0), 1.0);
  EXPECT_EQ(worst_case_violation_prob(Eigen::VectorXd(0), 0.3), 0.0);
  EXPECT_EQ(worst_case_violation_prob(Eigen::Vector2d(oracle::kInf, oracle::kInf), 0.3), 0.0);
}

TEST(WorstCaseProbProperty, MatchesLambdaGrid) {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 100; ++inst) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 50);
    Eigen::VectorXd d(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      const double r = u(rng);
      d[m] = r < 0.1 ? 0.0 : r < 0.15 ? oracle::kInf : 5.0 * u(rng);
    }
    const double theta = std::pow(10.0, -4.0 + 4.0 * u(rng));
    EXPECT_NEAR(worst_case_violation_prob(d, theta), oracle::wc_prob_grid(d, theta), 1e-8) << inst;
  }
}

TEST(WorstCaseProbProperty, MatchesExhaustiveDiscreteSearch) {
  std::mt19937_64 rng(92);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PartitionSpec p = box(1, 0.0, 10.0);
  for (int inst = 0; inst < 20; ++inst) {
    const int N = 1 + static_cast<int>(rng() % 4);
    const double lo = 1.0 + 3.0 * u(rng), hi = 6.0 + 3.0 * u(rng);
    Eigen::MatrixXd m(N, 1);
    std::vector<double> pts{lo, hi, 10.0}, samples;
    for (int i = 0; i < N; ++i) {
      m(i, 0) = std::round((lo - 0.5 + (hi - lo + 1.0) * u(rng)) * 100.0) / 100.0;
      samples.push_back(m(i, 0));
      if (std::find(pts.begin(), pts.end(), m(i, 0)) == pts.end()) pts.push_back(m(i, 0));
    }
    ASSERT_LE(pts.size(), 7u);
    const double theta = 0.05 + 1.5 * u(rng);
    const double got = slab_violation_prob(from_matrix(m), p, Slab{0, Eigen::VectorXd::Ones(1), lo, hi}, theta);
    EXPECT_NEAR(got, oracle::wc_prob_exhaustive(samples, pts, lo, hi, theta), 1e-6) << inst;
    EXPECT_NEAR(got, oracle::wc_prob_knapsack(samples, lo, hi, theta), 1e-9) << inst;
  }
}

TEST(TightenSlab, ZeroRadiusKeepsAllSamples) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(2.0, 8.0);
  Eigen::MatrixXd m(20, 1);
  for (Eigen::Index i = 0; i < 20; ++i) m(i, 0) = u(rng);
  const SampleSet s = from_matrix(m);
  const PartitionSpec p = box(1, 0.0, 10.0);
  const Slab slab = tighten_slab(s, p, 0, Eigen::VectorXd::Ones(1), 0.0, 0.04);  // < 1/20
  const auto t = path_requirements(m.col(0), 0.0, 10.0);
  const double a = m.col(0).mean();
  const double t_got = (slab.hi - a) / (10.0 - a);
  EXPECT_GE(t_got, t[0]);
  EXPECT_LE(t_got, t[0] + 2e-4);
  EXPECT_LE(slab.lo, m.minCoeff());
  EXPECT_GE(slab.hi, m.maxCoeff());
  EXPECT_LE(slab.achieved_prob, 0.04);
}

TEST(TightenSlab, ZeroRadiusAllowsBudgetedExits) {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(80.5, 119.5);
  Eigen::MatrixXd m(100, 1);
  for (Eigen::Index i = 0; i < 100; ++i) m(i, 0) = u(rng);
  const SampleSet s = from_matrix(m);
  const PartitionSpec p = box(1, 80.0, 120.0);
  const RobustSet set = build_xirob(s, p, {0}, 0.0, 0.05);
  ASSERT_EQ(set.q(), 2);
  EXPECT_EQ(set.G(0, 0), 1.0);
  EXPECT_EQ(set.G(1, 0), -1.0);
  // Samples may sit on or outside the slab as long as their share is within
  // the budget; the oracle counts exits on the same path directly.
  int allowed = 0;
  while (static_cast<double>(allowed + 1) / 100.0 <= 0.05) ++allowed;
  const auto t = path_requirements(m.col(0), 80.0, 120.0);
  const double a = m.col(0).mean();
  const double t_got = (set.g[0] - a) / (120.0 - a);
  EXPECT_GE(t_got, t[static_cast<std::size_t>(allowed)]);
  EXPECT_LE(t_got, t[static_cast<std::size_t>(allowed)] + 2e-4);
  EXPECT_NEAR(-set.g[1], a - t_got * (a - 80.0), 1e-9);
  EXPECT_LE(static_cast<int>(set.excluded_samples.size()), allowed);
}

TEST(TightenSlab, LargeRadiusIsInfeasible) {
  Eigen::MatrixXd m(5, 1);
  m << 4, 5, 5, 6, 5;
  try {
    build_xirob(from_matrix(m), box(1, 0.0, 10.0), {0}, 50.0, 0.05);
    FAIL();
  } catch (const BudgetInfeasible& e) {
    EXPECT_EQ(e.group(), 0u);
    EXPECT_EQ(e.slab(), 0u);
  }
}

TEST(TightenSlab, Fig1StyleContainsAllSamples) {
  const SampleSet s = fig1_samples();
  const RobustSet set = build_xirob(s, box(2, 0.0, 10.0), {1}, 1e-3, 0.3);  // budget 0.1 < 1/7
  ASSERT_EQ(set.slabs.size(), 3u);
  EXPECT_EQ(set.slabs[2].kind, SlabKind::Eigen);
  for (Eigen::Index m = 0; m < s.size(); ++m) {
    const Eigen::VectorXd xi = s.sample(m);
    EXPECT_TRUE(((set.G * xi - set.g).array() <= 0.0).all()) << m;
  }
  EXPECT_TRUE(set.excluded_samples.empty());
}

TEST(BuildXirob, CountsForTwoGroups) {
  std::mt19937_64 rng(111);
  std::normal_distribution<double> nd(100.0, 4.0);
  Eigen::MatrixXd m(50, 6);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::clamp(nd(rng), 80.0, 120.0);
  const PartitionSpec p = box_partition({{0, 1, 2}, {3, 4, 5}}, Eigen::VectorXd::Constant(6, 80.0),
                                        Eigen::VectorXd::Constant(6, 120.0));
  const RobustSet set = build_xirob(from_matrix(m), p, {2, 2}, 1e-3, 0.05);
  EXPECT_EQ(set.n_dr, 10u);
  EXPECT_EQ(set.q(), 20);
  EXPECT_DOUBLE_EQ(set.budget, 0.005);
  // Rows are the +/- normals lifted to full coordinates.
  for (std::size_t k = 0; k < set.slabs.size(); ++k) {
    const auto& sl = set.slabs[k];
    const auto& grp = p.groups[sl.group];
    Eigen::VectorXd lifted = Eigen::VectorXd::Zero(6);
    for (std::size_t j = 0; j < grp.size(); ++j) lifted[static_cast<Eigen::Index>(grp[j])] = sl.normal[static_cast<Eigen::Index>(j)];
    EXPECT_EQ(Eigen::VectorXd(set.G.row(static_cast<Eigen::Index>(2 * k))), lifted);
    EXPECT_EQ(Eigen::VectorXd(set.G.row(static_cast<Eigen::Index>(2 * k + 1))), -lifted);
    EXPECT_NEAR(sl.normal.norm(), 1.0, 1e-12);
    EXPECT_LE(sl.lo, sl.hi);
  }
  EXPECT_THROW(build_xirob(from_matrix(m), p, {2}, 1e-3, 0.05), DimensionMismatch);
  EXPECT_THROW(build_xirob(from_matrix(m), p, {3, 0}, 1e-3, 0.05), KappaOutOfRange);
}

TEST(BuildXirob, KappaZeroIsTheBoxOfIndependentSlabs) {
  std::mt19937_64 rng(112);
  std::uniform_real_distribution<double> u(85.0, 115.0);
  Eigen::MatrixXd m(30, 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  const SampleSet s = from_matrix(m);
  const PartitionSpec p = box(3, 80.0, 120.0);
  const RobustSet set = build_xirob(s, p, {0}, 1e-3, 0.05);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Slab one = tighten_slab(s, p, 0, Eigen::VectorXd::Unit(3, j), 1e-3, 0.05 / 3.0);
    EXPECT_EQ(set.g[2 * j], one.hi);
    EXPECT_EQ(set.g[2 * j + 1], -one.lo);
  }
  // the row layout matches the support box
  EXPECT_EQ(set.G, p.Gamma[0]);
}

TEST(BuildXirobProperty, UnionBoundCertificate) {
  std::mt19937_64 rng(121);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 10; ++inst) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % 2);
    const Eigen::Index N = 20 + static_cast<Eigen::Index>(rng() % 30);
    Eigen::MatrixXd m(N, k);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double common = u(rng);
      for (Eigen::Index j = 0; j < k; ++j) m(i, j) = 80.0 + 40.0 * (0.7 * common + 0.3 * u(rng));
    }
    const SampleSet s = from_matrix(m);
    const PartitionSpec p = box(k, 80.0, 120.0);
    const double eps = 0.05 + 0.1 * u(rng), theta = std::pow(10.0, -4.0 + 2.0 * u(rng));
    const int kappa = static_cast<int>(rng() % static_cast<unsigned>(k));
    const RobustSet set = build_xirob(s, p, {kappa}, theta, eps);
    double total = 0.0;
    for (const auto& slab : set.slabs) {
      const double again = slab_violation_prob(s, p, slab, theta);
      EXPECT_NEAR(again, slab.achieved_prob, 1e-12);
      EXPECT_LE(again, set.budget + 1e-12);
      total += again;
    }
    EXPECT_LE(total, eps + 1e-12);
    for (Eigen::Index i = 0; i < N; ++i) {
      const bool in = set.contains(s.sample(i));
      const bool flagged = std::find(set.excluded_samples.begin(), set.excluded_samples.end(), i) !=
                           set.excluded_samples.end();
      EXPECT_NE(in, flagged);
    }
  }
}

TEST(BuildXirobProperty, WiderRadiusNeverShrinksSlabs) {
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PartitionSpec p = box(1, 0.0, 10.0);
  for (int inst = 0; inst < 10; ++inst) {
    Eigen::MatrixXd m(25, 1);
    for (Eigen::Index i = 0; i < 25; ++i) m(i, 0) = 2.0 + 6.0 * u(rng);
    const SampleSet s = from_matrix(m);
    double prev = -1.0;
    for (double theta : {0.0, 1e-4, 1e-3, 1e-2, 0.05}) {
      const Slab slab = tighten_slab(s, p, 0, Eigen::VectorXd::Ones(1), theta, 0.05);
      EXPECT_GE(slab.hi - slab.lo, prev - 1e-12) << inst << " theta " << theta;
      prev = slab.hi - slab.lo;
    }
  }
}

TEST(RobustSetJson, RoundTrip) {
  const RobustSet set = build_xirob(fig1_samples(), box(2, 0.0, 10.0), {1}, 1e-3, 0.3);
  const RobustSet back = robust_set_from_json(nlohmann::json::parse(to_json(set).dump()));
  EXPECT_EQ(back.G, set.G);
  EXPECT_EQ(back.g, set.g);
  EXPECT_EQ(back.slabs.size(), set.slabs.size());
  EXPECT_EQ(back.slabs[2].kind, SlabKind::Eigen);
  EXPECT_EQ(back.budget, set.budget);
  EXPECT_THROW(robust_set_from_json(nlohmann::json::object()), ParseError);
}
