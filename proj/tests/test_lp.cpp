#include <gtest/gtest.h>

#include <random>

#include "drcc/errors.hpp"
#include "drcc/lp.hpp"
#include "oracles.hpp"

using namespace drcc;

namespace {

const LpBackend kBackends[] = {LpBackend::Simplex, LpBackend::Highs};

}  // namespace

TEST(SolveLp, OneDimensionalBound) {
  for (auto be : kBackends) {
    LpBuilder b(1);
    b.set_cost(0, 1.0);
    b.set_bounds(0, 3.0, kInf);
    const LpResult r = solve_lp(b.build(), be);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.x[0], 3.0, 1e-9);
    EXPECT_NEAR(r.objective, 3.0, 1e-9);
  }
}

TEST(SolveLp, UnitSimplex) {
  for (auto be : kBackends) {
    LpBuilder b(2);
    b.set_cost(0, -1.0);
    b.set_cost(1, -1.0);
    b.add_le({{0, 1.0}, {1, 1.0}}, 1.0);
    const LpResult r = solve_lp(b.build(), be);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.objective, -1.0, 1e-9);
    EXPECT_NEAR(r.x.sum(), 1.0, 1e-9);
  }
}

TEST(SolveLp, InfeasibleAndUnbounded) {
  for (auto be : kBackends) {
    LpBuilder inf(1);
    inf.add_le({{0, 1.0}}, -1.0);  // x <= -1 with x >= 0
    EXPECT_EQ(solve_lp(inf.build(), be).status, LpStatus::Infeasible);

    LpBuilder unb(2);
    unb.set_cost(0, -1.0);
    unb.add_le({{0, 1.0}, {1, -1.0}}, 1.0);
    EXPECT_EQ(solve_lp(unb.build(), be).status, LpStatus::Unbounded);
  }
}

TEST(SolveLp, FreeVariablesAndEqualities) {
  for (auto be : kBackends) {
    // min x + 2y  s.t. x - y = 1, x free, -5 <= y <= 5
    LpBuilder b(2);
    b.set_bounds(0, -kInf, kInf);
    b.set_bounds(1, -5.0, 5.0);
    b.set_cost(0, 1.0);
    b.set_cost(1, 2.0);
    b.add_eq({{0, 1.0}, {1, -1.0}}, 1.0);
    const LpResult r = solve_lp(b.build(), be);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.x[1], -5.0, 1e-9);
    EXPECT_NEAR(r.objective, -4.0 - 10.0, 1e-9);
  }
}

TEST(SolveLp, DegenerateCyclingExample) {
  // Beale's example, which cycles under textbook Dantzig pricing.
  for (auto be : kBackends) {
    LpBuilder b(4);
    const double c[] = {-0.75, 150.0, -0.02, 6.0};
    for (int i = 0; i < 4; ++i) b.set_cost(i, c[i]);
    b.add_le({{0, 0.25}, {1, -60.0}, {2, -0.04}, {3, 9.0}}, 0.0);
    b.add_le({{0, 0.5}, {1, -90.0}, {2, -0.02}, {3, 3.0}}, 0.0);
    b.add_le({{2, 1.0}}, 1.0);
    const LpResult r = solve_lp(b.build(), be);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.objective, -0.05, 1e-9);
  }
}

TEST(SolveLp, ValidateRejectsBadInput) {
  LinearProgram lp = LpBuilder(2).build();
  lp.b.resize(3);
  EXPECT_THROW(lp.validate(), DimensionMismatch);
  LinearProgram nan = LpBuilder(1).build();
  nan.objective[0] = std::nan("");
  EXPECT_THROW(nan.validate(), ValidationError);
}

// Random bounded feasible LPs against brute-force vertex enumeration.
TEST(SolveLpProperty, MatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int inst = 0; inst < 60; ++inst) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int m = 2 + static_cast<int>(rng() % 5);
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd c(n), x0(n);
    for (int j = 0; j < n; ++j) c[j] = u(rng), x0[j] = u(rng);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = u(rng);
    const Eigen::VectorXd b = A * x0 + Eigen::VectorXd::Constant(m, 0.5);  // x0 strictly feasible

    LpBuilder builder(n);
    Eigen::MatrixXd full(m + 2 * n, n);
    Eigen::VectorXd rhs(m + 2 * n);
    full.topRows(m) = A;
    rhs.head(m) = b;
    for (int j = 0; j < n; ++j) {
      builder.set_bounds(j, -2.0, 2.0);
      builder.set_cost(j, c[j]);
      full.row(m + 2 * j) = Eigen::VectorXd::Unit(n, j).transpose();
      full.row(m + 2 * j + 1) = -Eigen::VectorXd::Unit(n, j).transpose();
      rhs[m + 2 * j] = 2.0;
      rhs[m + 2 * j + 1] = 2.0;
    }
    for (int i = 0; i < m; ++i) {
      LpBuilder::Terms t;
      for (int j = 0; j < n; ++j) t.emplace_back(j, A(i, j));
      builder.add_le(t, b[i]);
    }
    const LinearProgram lp = builder.build();
    const double expect = oracle::vertex_lp(c, full, rhs);
    for (auto be : kBackends) {
      const LpResult r = solve_lp(lp, be);
      ASSERT_EQ(r.status, LpStatus::Optimal);
      EXPECT_NEAR(r.objective, expect, 1e-6) << "instance " << inst;
      EXPECT_NEAR(r.objective, c.dot(r.x), 1e-7 * (1.0 + std::abs(expect)));
      EXPECT_LT(lp.max_violation(r.x), 1e-7);
    }
  }
}
