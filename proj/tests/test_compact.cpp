#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>
#include <set>

#include "drcc/compact.hpp"
#include "drcc/errors.hpp"
#include "drcc/lp.hpp"
#include "oracles.hpp"

using namespace drcc;

namespace {

NetworkCase rts24() { return load_case(std::string(DRCC_SOURCE_DIR) + "/data/rts24.json"); }

std::vector<Contingency> experiment_contingencies(const NetworkCase& net) {
  std::ifstream is(std::string(DRCC_SOURCE_DIR) + "/config/rts24_experiment.json");
  const auto doc = nlohmann::json::parse(is);
  std::vector<Contingency> out;
  for (const auto& key : doc["contingencies"]) out.push_back(parse_contingency(net, key.get<std::string>()));
  return out;
}

NetworkCase triangle_with_wind() {
  auto doc = oracle::triangle_doc();
  doc["wind_units"] = {oracle::wind("w1", 1, 20.0, 10.0, 30.0)};
  return parse_case(doc);
}

}  // namespace

TEST(BuildCompact, Rts24RowCount) {
  const NetworkCase net = rts24();
  const auto conts = experiment_contingencies(net);
  ASSERT_EQ(conts.size(), 35u);
  const CompactProblem p = build_compact(net, conts, 0.05);
  // Per contingency: 2|G| reserve rows plus two rows per surviving line.
  std::size_t expect = 0;
  for (const auto& c : conts) {
    const std::size_t lines = net.lines.size() - (c.kind == Contingency::Kind::LineOut ? 1 : 0);
    expect += 2 * (net.generators.size() + lines);
  }
  EXPECT_EQ(expect, 3456u);
  EXPECT_EQ(p.K(), expect);
  EXPECT_EQ(p.n_x(), static_cast<Eigen::Index>(4 * 12 + 2 * 35 * 12));
  EXPECT_EQ(p.n_xi, 6);
}

TEST(BuildCompact, SingleContingencyFormula) {
  const NetworkCase net = triangle_with_wind();
  const CompactProblem p = build_compact(net, {Contingency::intact()}, 0.05);
  EXPECT_EQ(p.K(), 2u * 1 * (2 + 3));
}

TEST(BuildCompact, NoWindMergesIntoLambda) {
  const NetworkCase net = parse_case(oracle::triangle_doc());
  const CompactProblem none = build_compact(net, {Contingency::intact()}, 0.05);
  const CompactProblem with = build_compact(triangle_with_wind(), {Contingency::intact()}, 0.05);
  EXPECT_EQ(none.K(), 0u);
  EXPECT_EQ(none.n_xi, 0);
  EXPECT_EQ(none.Lambda.rows(), with.Lambda.rows() + static_cast<Eigen::Index>(with.K()));
}

TEST(BuildCompact, LayoutIsBijective) {
  const NetworkCase net = rts24();
  const CompactProblem p = build_compact(net, experiment_contingencies(net), 0.05);
  const auto& L = p.layout;
  std::set<Eigen::Index> seen;
  for (std::size_t g = 0; g < L.n_gen; ++g) {
    seen.insert({L.p(g), L.r_plus(g), L.r_minus(g), L.r_con(g)});
    for (std::size_t c = 0; c < L.n_cont; ++c) seen.insert({L.alpha(c, g), L.delta(c, g)});
  }
  EXPECT_EQ(static_cast<Eigen::Index>(seen.size()), L.n_x());
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), L.n_x() - 1);
}

TEST(BuildCompact, BilinearTermsOnlyInAlphaColumns) {
  const NetworkCase net = rts24();
  const CompactProblem p = build_compact(net, experiment_contingencies(net), 0.05);
  for (const auto& row : p.uncertain_rows) {
    ASSERT_TRUE(std::isfinite(row.h));
    for (int k = 0; k < row.F.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(row.F, k); it; ++it)
        EXPECT_TRUE(p.layout.is_alpha(it.row()));
  }
}

TEST(BuildCompact, InsufficientCapacityIsADiagnostic) {
  auto doc = oracle::triangle_doc();
  doc["loads"] = {{{"bus", 3}, {"demand", 1000.0}}};
  const CompactProblem p = build_compact(parse_case(doc), {Contingency::intact()}, 0.05);
  ASSERT_FALSE(p.diagnostics.empty());
}

TEST(BuildCompact, MisalignedPtdfs) {
  const NetworkCase net = triangle_with_wind();
  EXPECT_THROW(build_compact(net, {Contingency::intact(), Contingency::gen_out(0)},
                             {compute_ptdf(net, Contingency::intact())}, 0.05),
               DimensionMismatch);
}

TEST(EvaluateRow, ZeroVectors) {
  const NetworkCase net = triangle_with_wind();
  const CompactProblem p = build_compact(net, enumerate_contingencies(net, {}), 0.05);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(p.n_x());
  const Eigen::VectorXd xi = Eigen::VectorXd::Zero(p.n_xi);
  for (std::size_t k = 0; k < p.K(); ++k) EXPECT_DOUBLE_EQ(evaluate_row(p, k, x, xi), -p.uncertain_rows[k].h);
  EXPECT_THROW(evaluate_row(p, p.K(), x, xi), IndexOutOfRange);
  EXPECT_THROW(evaluate_row(p, 0, x, Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST(EvaluateRow, UpReserveHandExample) {
  const NetworkCase net = rts24();  // six units at 100 MW forecast: sum 600
  const CompactProblem p = build_compact(net, {Contingency::intact()}, 0.05);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.n_x());
  x[p.layout.alpha(0, 0)] = 0.5;
  x[p.layout.r_plus(0)] = 10.0;
  const Eigen::VectorXd xi = Eigen::VectorXd::Constant(6, 100.0);
  std::size_t k = 0;
  while (!(p.uncertain_rows[k].family == RowFamily::ReserveUp && p.uncertain_rows[k].element == 0)) ++k;
  EXPECT_NEAR(evaluate_row(p, k, x, xi), 0.5 * (600.0 - 600.0) - 10.0, 1e-12);
  const Eigen::VectorXd low = Eigen::VectorXd::Constant(6, 90.0);
  EXPECT_NEAR(evaluate_row(p, k, x, low), 0.5 * 60.0 - 10.0, 1e-12);
}

TEST(EvaluateRow, OverloadedLine) {
  auto doc = nlohmann::json::parse(to_json(oracle::two_bus()).dump());
  doc["wind_units"] = {oracle::wind("w1", 1, 0.0, 0.0, 10.0)};
  const NetworkCase net = parse_case(doc);
  const CompactProblem p = build_compact(net, {Contingency::intact()}, 0.05);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(p.n_x());
  const Eigen::VectorXd xi = Eigen::VectorXd::Zero(1);
  double worst = -kInf;
  for (std::size_t k = 0; k < p.K(); ++k)
    if (p.uncertain_rows[k].family == RowFamily::LineUpper || p.uncertain_rows[k].family == RowFamily::LineLower)
      worst = std::max(worst, evaluate_row(p, k, x, xi));
  EXPECT_NEAR(worst, 100.0 - 50.0, 1e-9);
}

// Every uncertain row against the chance-constraint inequalities written out
// longhand, on random x and xi.
TEST(EvaluateRowProperty, MatchesLonghandModel) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const NetworkCase rts = rts24();
  const std::vector<std::pair<NetworkCase, std::vector<Contingency>>> cases = {
      {rts, experiment_contingencies(rts)},
      {oracle::small_wind_case(3), enumerate_contingencies(oracle::small_wind_case(3), {})}};
  for (const auto& [net, conts] : cases) {
    const CompactProblem p = build_compact(net, conts, 0.05);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd x(p.n_x()), xi(p.n_xi);
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 100.0 * u(rng) - 20.0;
      for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = 50.0 + 100.0 * u(rng);
      for (std::size_t c = 0; c < conts.size(); ++c) {
        const auto lh = oracle::longhand(net, conts[c], p.layout, c, x, xi);
        std::map<std::size_t, std::size_t> line_pos;
        for (std::size_t l = 0, r = 0; l < net.lines.size(); ++l)
          if (!(conts[c].kind == Contingency::Kind::LineOut && conts[c].element == l)) line_pos[l] = r++;
        std::size_t rows = 0;
        for (std::size_t k = 0; k < p.K(); ++k) {
          const auto& row = p.uncertain_rows[k];
          if (row.contingency != c) continue;
          ++rows;
          double expect = 0.0;
          switch (row.family) {
            case RowFamily::ReserveUp: expect = lh.reserve_up[row.element]; break;
            case RowFamily::ReserveDown: expect = lh.reserve_down[row.element]; break;
            case RowFamily::LineUpper: expect = lh.line_upper[line_pos.at(row.element)]; break;
            case RowFamily::LineLower: expect = lh.line_lower[line_pos.at(row.element)]; break;
          }
          EXPECT_NEAR(evaluate_row(p, k, x, xi), expect, 1e-9 * (1.0 + std::abs(expect))) << p.row_label(k);
        }
        EXPECT_EQ(rows, 2 * lh.reserve_up.size() + 2 * lh.line_upper.size());
      }
    }
  }
}

// A feasible point of the deterministic rows decodes to a consistent policy.
TEST(BuildCompactProperty, DeterministicRowsEncodeThePolicy) {
  const NetworkCase net = oracle::small_wind_case(2);
  const auto conts = enumerate_contingencies(net, {});
  const CompactProblem p = build_compact(net, conts, 0.05);
  LpBuilder b(p.n_x());
  for (Eigen::Index i = 0; i < p.n_x(); ++i) {
    b.set_bounds(i, -kInf, kInf);
    b.set_cost(i, p.c[i] + 0.01 * static_cast<double>(i % 7));  // tilt toward a vertex
  }
  for (Eigen::Index r = 0; r < p.Lambda.rows(); ++r) {
    LpBuilder::Terms t;
    for (SparseRowMatrix::InnerIterator it(p.Lambda, r); it; ++it) t.emplace_back(it.col(), it.value());
    b.add_le(t, p.beta[r]);
  }
  const LpResult res = solve_lp(b.build());
  ASSERT_EQ(res.status, LpStatus::Optimal);
  const Eigen::VectorXd& x = res.x;
  const auto& L = p.layout;
  const double tol = 1e-6;
  double total_p = 0.0;
  for (std::size_t g = 0; g < L.n_gen; ++g) {
    const auto& gen = net.generators[g];
    total_p += x[L.p(g)];
    EXPECT_LE(x[L.p(g)] + x[L.r_plus(g)] + x[L.r_con(g)], gen.p_max + tol);
    EXPECT_GE(x[L.p(g)] - x[L.r_minus(g)], gen.p_min - tol);
    for (Eigen::Index v : {L.r_plus(g), L.r_minus(g), L.r_con(g)}) {
      EXPECT_GE(x[v], -tol);
      EXPECT_LE(x[v], gen.r_max + tol);
    }
  }
  EXPECT_NEAR(total_p + net.total_forecast(), net.total_demand(), tol);
  for (std::size_t c = 0; c < conts.size(); ++c) {
    double asum = 0.0, dsum = 0.0;
    for (std::size_t g = 0; g < L.n_gen; ++g) {
      asum += x[L.alpha(c, g)];
      dsum += x[L.delta(c, g)];
      EXPECT_GE(x[L.alpha(c, g)], -tol);
    }
    EXPECT_NEAR(asum, 1.0, tol);
    EXPECT_NEAR(dsum, 0.0, tol);
    if (conts[c].kind == Contingency::Kind::GenOut) {
      const std::size_t gc = conts[c].element;
      EXPECT_NEAR(x[L.alpha(c, gc)], 0.0, tol);
      EXPECT_NEAR(x[L.delta(c, gc)], -x[L.p(gc)], tol);
      for (std::size_t g = 0; g < L.n_gen; ++g) {
        if (g == gc) continue;
        EXPECT_GE(x[L.delta(c, g)], -tol);
        EXPECT_LE(x[L.delta(c, g)], x[L.r_con(g)] + tol);
      }
    } else {
      for (std::size_t g = 0; g < L.n_gen; ++g) EXPECT_NEAR(x[L.delta(c, g)], 0.0, tol);
    }
  }
}

TEST(DumpListing, NamesEveryRow) {
  const NetworkCase net = triangle_with_wind();
  const CompactProblem p = build_compact(net, {Contingency::intact()}, 0.05);
  const std::string text = dump_listing(p);
  EXPECT_NE(text.find("reserve_up[intact][g1]"), std::string::npos);
  EXPECT_NE(text.find("line_lower[intact][2-3]"), std::string::npos);
}
