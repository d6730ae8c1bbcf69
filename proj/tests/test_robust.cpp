#include <gtest/gtest.h>

#include <random>

#include "drcc/errors.hpp"
#include "drcc/robust.hpp"
#include "oracles.hpp"

using namespace drcc;

namespace {

// One free decision x0 (three more pinned at zero) and one uncertain row
// 0.5 x0 + x0 xi <= h over xi in [0, 1].
CompactProblem scalar_toy(double h, double x_lo, double x_hi) {
  CompactProblem p;
  p.layout.n_gen = 1;
  p.layout.n_cont = 0;
  p.n_xi = 1;
  p.c = Eigen::VectorXd::Zero(4);
  p.c[0] = -1.0;
  LpBuilder b(4);
  b.add_le({{0, 1.0}}, x_hi);
  b.add_le({{0, -1.0}}, -x_lo);
  for (int i = 1; i < 4; ++i) {
    b.add_le({{i, 1.0}}, 0.0);
    b.add_le({{i, -1.0}}, 0.0);
  }
  const LinearProgram lp = b.build();
  p.Lambda = lp.A;
  p.beta = lp.b;
  p.det_labels.assign(static_cast<std::size_t>(lp.A.rows()), "bound");
  UncertainRow row;
  row.e.resize(4);
  row.e.insert(0) = 0.5;
  row.f = Eigen::VectorXd::Zero(1);
  row.F.resize(4, 1);
  row.F.insert(0, 0) = 1.0;
  row.h = h;
  p.uncertain_rows.push_back(row);
  p.contingency_keys = {};
  return p;
}

Polyhedron interval(double lo, double hi) {
  Polyhedron s;
  s.G = Eigen::MatrixXd(2, 1);
  s.G << 1, -1;
  s.g = Eigen::Vector2d(hi, -lo);
  return s;
}

LpStatus status_of(const LinearProgram& lp) { return solve_lp(lp).status; }

std::vector<Contingency> few(const NetworkCase& net) {
  return {Contingency::intact(), Contingency::gen_out(0), parse_contingency(net, "line:1-2")};
}

PartitionSpec all_in_one(const NetworkCase& net) {
  IndexGroup g;
  for (std::size_t w = 0; w < net.wind_units.size(); ++w) g.push_back(w);
  return box_partition(net, {g});
}

}  // namespace

TEST(Reformulate, ScalarToyMatchesHandDual) {
  // max over [0,1] of x*xi is max(x, 0); feasible iff max(x,0) + 0.5x <= h.
  for (double x : {-1.0, 0.4}) {
    const double need = std::max(x, 0.0) + 0.5 * x;
    EXPECT_EQ(status_of(reformulate_robust(scalar_toy(need, x, x), interval(0, 1))), LpStatus::Optimal);
    EXPECT_EQ(status_of(reformulate_robust(scalar_toy(need - 0.01, x, x), interval(0, 1))), LpStatus::Infeasible);
  }
  // free x: the best x under h = 0.6 is 0.4
  const CompactProblem p = scalar_toy(0.6, -10.0, 10.0);
  const LpResult r = solve_lp(reformulate_robust(p, interval(0, 1)));
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.x[0], 0.4, 1e-9);
}

TEST(Reformulate, CountsVariablesAndRows) {
  const NetworkCase net = oracle::small_wind_case(3);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  const Polyhedron s = support_polyhedron(all_in_one(net));
  const LinearProgram lp = reformulate_robust(p, s);
  const auto K = static_cast<Eigen::Index>(p.K());
  EXPECT_EQ(lp.num_vars(), p.n_x() + K * s.G.rows());
  EXPECT_EQ(lp.num_inequalities(), p.Lambda.rows() + K);
  EXPECT_EQ(lp.num_equalities(), K * p.n_xi);
  EXPECT_NO_THROW(lp.validate());
  EXPECT_THROW(reformulate_robust(p, interval(0, 1)), DimensionMismatch);
}

// Dual reformulation against the same robust LP written with one row per
// vertex of the set.
TEST(ReformulateProperty, MatchesVertexEnumeration) {
  std::mt19937_64 rng(141);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd;
  int solved = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int nw = 1 + inst % 3;
    const NetworkCase net = oracle::small_wind_case(nw, 100.0 + 80.0 * u(rng), 60.0 + 80.0 * u(rng));
    const CompactProblem p = build_compact(net, few(net), 0.05);
    Polyhedron set = support_polyhedron(all_in_one(net));
    const int extra = std::min(8 - 2 * nw, 2);
    for (int e = 0; e < extra; ++e) {
      Eigen::VectorXd a(nw);
      for (int j = 0; j < nw; ++j) a[j] = nd(rng);
      a.normalize();
      set.G.conservativeResize(set.G.rows() + 1, Eigen::NoChange);
      set.g.conservativeResize(set.g.size() + 1);
      set.G.row(set.G.rows() - 1) = a.transpose();
      set.g[set.g.size() - 1] = a.dot(Eigen::VectorXd::Constant(nw, 20.0)) + 8.0 * u(rng);
    }
    ASSERT_LE(set.G.rows(), 8);
    const LpResult dual = solve_lp(reformulate_robust(p, set));
    const LpResult vert = solve_lp(oracle::vertex_robust_lp(p, set.G, set.g));
    ASSERT_EQ(dual.status, vert.status) << inst;
    if (dual.status != LpStatus::Optimal) continue;
    ++solved;
    EXPECT_NEAR(p.c.dot(dual.x.head(p.n_x())), vert.objective, 1e-6 * (1.0 + std::abs(vert.objective))) << inst;
  }
  EXPECT_GE(solved, 40);
}

TEST(SolveRobust, SupportBoxEqualsWorstCase) {
  const NetworkCase net = oracle::small_wind_case(2);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  const PartitionSpec part = all_in_one(net);
  const DispatchSolution wc = solve_worstcase(p, part);
  RobustSet full;
  full.G = support_polyhedron(part).G;
  full.g = support_polyhedron(part).g;
  const DispatchSolution dr = solve_drpoly(p, full);
  EXPECT_EQ(wc.cost, dr.cost);
  EXPECT_TRUE(wc.audit.passed);
  EXPECT_EQ(wc.audit.rows_checked, p.K());
  EXPECT_LT(deterministic_violation(p, wc.x), 1e-7);
}

TEST(SolveRobust, PointSetEqualsSingleScenario) {
  const NetworkCase net = oracle::small_wind_case(3);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  const Eigen::Vector3d xi0(14.0, 27.0, 19.5);
  const PartitionSpec point = box_partition({{0, 1, 2}}, xi0, xi0);
  SampleSet one;
  one.samples = xi0.transpose();
  const DispatchSolution wc = solve_worstcase(p, point);
  const DispatchSolution sc = solve_scenario(p, one);
  EXPECT_NEAR(wc.cost, sc.cost, 1e-7 * std::abs(sc.cost));
}

TEST(SolveRobust, ScenarioAtForecastIsTheDeterministicDispatch) {
  const NetworkCase net = oracle::small_wind_case(2);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  SampleSet one;
  one.samples = p.forecast.transpose();
  const DispatchSolution sc = solve_scenario(p, one);
  // At the forecast the mismatch is zero, so reserves are never needed.
  for (std::size_t g = 0; g < p.layout.n_gen; ++g) {
    EXPECT_NEAR(sc.r_plus[static_cast<Eigen::Index>(g)], 0.0, 1e-7);
    EXPECT_NEAR(sc.r_minus[static_cast<Eigen::Index>(g)], 0.0, 1e-7);
  }
}

TEST(SolveRobust, NoWindEqualsPlainLp) {
  // line outages are left out: losing 1-3 puts the whole load on 2-3
  const NetworkCase net = parse_case(oracle::triangle_doc());
  const CompactProblem p =
      build_compact(net, {Contingency::intact(), Contingency::gen_out(0), Contingency::gen_out(1)}, 0.05);
  ASSERT_EQ(p.K(), 0u);
  LpBuilder b(p.n_x());
  for (Eigen::Index i = 0; i < p.n_x(); ++i) {
    b.set_bounds(i, -kInf, kInf);
    b.set_cost(i, p.c[i]);
  }
  for (Eigen::Index r = 0; r < p.Lambda.rows(); ++r) {
    LpBuilder::Terms t;
    for (SparseRowMatrix::InnerIterator it(p.Lambda, r); it; ++it) t.emplace_back(it.col(), it.value());
    b.add_le(t, p.beta[r]);
  }
  const LpResult plain = solve_lp(b.build());
  ASSERT_EQ(plain.status, LpStatus::Optimal);
  RobustSet empty;
  empty.G.resize(0, 0);
  empty.g.resize(0);
  EXPECT_NEAR(solve_drpoly(p, empty).cost, plain.objective, 1e-9 * std::abs(plain.objective));
  EXPECT_NEAR(solve_worstcase(p, PartitionSpec{}).cost, plain.objective, 1e-9 * std::abs(plain.objective));
}

TEST(SolveRobust, InfeasibleReportsARow) {
  const NetworkCase net = oracle::small_wind_case(2, 150.0, 1.0);  // 1 MW lines
  const CompactProblem p = build_compact(net, few(net), 0.05);
  try {
    solve_worstcase(p, all_in_one(net));
    FAIL();
  } catch (const InfeasibleRobust& e) {
    EXPECT_NE(std::string(e.what()).find("robust counterpart is infeasible"), std::string::npos) << e.what();
  }
  SampleSet one;
  one.samples = p.forecast.transpose();
  EXPECT_THROW(solve_scenario(p, one), InfeasibleScenario);
  EXPECT_THROW(solve_scenario(p, SampleSet{}), TooFewSamples);
}

TEST(SolveRobust, SmallerSetIsCheaper) {
  const NetworkCase net = oracle::small_wind_case(2);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  const PartitionSpec part = all_in_one(net);
  const DispatchSolution wc = solve_worstcase(p, part);
  const PartitionSpec inner = box_partition({{0, 1}}, Eigen::Vector2d(15, 15), Eigen::Vector2d(25, 25));
  const DispatchSolution in = solve_worstcase(p, inner);
  EXPECT_LE(in.cost, wc.cost + 1e-9);
}

TEST(Audit, WorstCaseRowsMatchVertexMaximum) {
  const NetworkCase net = oracle::small_wind_case(2);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  const PartitionSpec part = all_in_one(net);
  const DispatchSolution wc = solve_worstcase(p, part);
  const Polyhedron s = support_polyhedron(part);
  const auto verts = oracle::vertices(s.G, s.g);
  ASSERT_EQ(verts.size(), 4u);
  for (std::size_t k = 0; k < p.K(); ++k) {
    const Eigen::VectorXd dir = p.uncertain_rows[k].xi_coefficients(wc.x);
    double best = -kInf;
    for (const auto& v : verts) best = std::max(best, dir.dot(v));
    EXPECT_NEAR(row_worst_case(p, k, wc.x, s), best, 1e-7);
  }
  // A dispatch that ignores the uncertainty fails the audit.
  SampleSet one;
  one.samples = p.forecast.transpose();
  const DispatchSolution naive = solve_scenario(p, one);
  EXPECT_FALSE(duality_audit(p, naive.x, s).passed);
}

TEST(Chebyshev, BoxCenter) {
  Polyhedron s;
  s.G = Eigen::MatrixXd(4, 2);
  s.G << 1, 0, -1, 0, 0, 1, 0, -1;
  s.g = Eigen::Vector4d(4, 0, 2, 0);
  const Eigen::VectorXd c = chebyshev_center(s);
  EXPECT_NEAR(c[1], 1.0, 1e-9);
  EXPECT_GE(c[0], 1.0 - 1e-9);
  EXPECT_LE(c[0], 3.0 + 1e-9);
}

TEST(SolutionJson, RoundTrip) {
  const NetworkCase net = oracle::small_wind_case(2);
  const CompactProblem p = build_compact(net, few(net), 0.05);
  const DispatchSolution wc = solve_worstcase(p, all_in_one(net));
  const DispatchSolution back = solution_from_json(nlohmann::json::parse(to_json(wc, p).dump()), p);
  EXPECT_EQ(back.x, wc.x);
  EXPECT_EQ(back.method, "worstcase");
  EXPECT_NEAR(back.cost, wc.cost, 1e-9);
  const CompactProblem other = build_compact(net, {Contingency::intact()}, 0.05);
  EXPECT_THROW(solution_from_json(to_json(wc, p), other), DimensionMismatch);
}
