#include <gtest/gtest.h>

#include <random>

#include "drcc/errors.hpp"
#include "drcc/network.hpp"
#include "oracles.hpp"

using namespace drcc;

#ifndef DRCC_DATA_DIR
#error "DRCC_DATA_DIR must be defined"
#endif

namespace {

NetworkCase rts24() { return load_case(std::string(DRCC_DATA_DIR) + "/rts24.json"); }

}  // namespace

TEST(LoadCase, Rts24Shape) {
  const NetworkCase net = rts24();
  EXPECT_EQ(net.generators.size(), 12u);
  EXPECT_EQ(net.wind_units.size(), 6u);
  std::vector<int> wind_buses;
  for (const auto& w : net.wind_units) wind_buses.push_back(w.bus);
  EXPECT_EQ(wind_buses, (std::vector<int>{3, 5, 7, 16, 21, 23}));
  EXPECT_NEAR(net.total_demand(), 2900.0, 1e-9);
}

TEST(LoadCase, MinimalTwoBus) {
  const NetworkCase net = oracle::two_bus();
  EXPECT_EQ(net.buses.size(), 2u);
  EXPECT_EQ(net.lines.size(), 1u);
  EXPECT_EQ(net.slack_bus, 1);  // lowest bus with a generator
}

TEST(LoadCase, ZeroReactanceNamesTheLine) {
  auto doc = oracle::triangle_doc();
  doc["lines"][1]["reactance"] = 0.0;
  try {
    parse_case(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "lines[1].reactance");
  }
}

TEST(LoadCase, MalformedInputs) {
  auto doc = oracle::triangle_doc();
  doc.erase("lines");
  EXPECT_THROW(parse_case(doc), ParseError);
  EXPECT_THROW(load_case("/nonexistent/case.json"), ParseError);

  auto neg = oracle::triangle_doc();
  neg["generators"][0]["p_min"] = 500.0;
  EXPECT_THROW(parse_case(neg), ValidationError);

  auto disc = oracle::triangle_doc();
  disc["buses"] = {1, 2, 3, 4};
  EXPECT_THROW(parse_case(disc), ValidationError);
}

TEST(LoadCase, JsonRoundTrip) {
  const NetworkCase net = rts24();
  const NetworkCase back = parse_case(to_json(net));
  EXPECT_EQ(back.lines.size(), net.lines.size());
  EXPECT_EQ(back.slack_bus, net.slack_bus);
  EXPECT_EQ(back.generators[5].h_con, net.generators[5].h_con);
}

TEST(Contingencies, TwoBusSkipsBridge) {
  const NetworkCase net = oracle::two_bus();
  const auto cs = enumerate_contingencies(net, {});
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0], Contingency::intact());
  EXPECT_EQ(cs[1], Contingency::gen_out(0));
}

TEST(Contingencies, TriangleHasSix) {
  const NetworkCase net = parse_case(oracle::triangle_doc());
  const auto cs = enumerate_contingencies(net, {});
  ASSERT_EQ(cs.size(), 6u);
  EXPECT_EQ(cs[0].kind, Contingency::Kind::Intact);
  EXPECT_EQ(cs[1], Contingency::gen_out(0));
  EXPECT_EQ(cs[2], Contingency::gen_out(1));
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(cs[3 + l], Contingency::line_out(l));
}

TEST(Contingencies, Rts24ExcludesLine78) {
  const NetworkCase net = rts24();
  const auto cs = enumerate_contingencies(net, {"7-8"});
  const std::size_t l78 = net.line_index("7-8");
  for (const auto& c : cs)
    if (c.kind == Contingency::Kind::LineOut) EXPECT_NE(c.element, l78);
  // 7-8 is also a bridge, so it is skipped even when not excluded.
  EXPECT_EQ(enumerate_contingencies(net, {}).size(), cs.size());
  EXPECT_EQ(cs.size(), 1 + 12 + 37u);
  EXPECT_EQ(cs, enumerate_contingencies(net, {"7-8"}));  // deterministic
}

TEST(Contingencies, KeysRoundTrip) {
  const NetworkCase net = rts24();
  for (const auto& c : enumerate_contingencies(net, {}))
    EXPECT_EQ(parse_contingency(net, contingency_key(net, c)), c);
  EXPECT_THROW(parse_contingency(net, "line:nope"), IndexOutOfRange);
}

TEST(Ptdf, TwoBusSinglePath) {
  const NetworkCase net = oracle::two_bus();
  const PtdfMatrix m = compute_ptdf(net, Contingency::intact());
  ASSERT_EQ(m.entries.rows(), 1);
  EXPECT_NEAR(std::abs(m.entries(0, 1)), 1.0, 1e-12);
  EXPECT_EQ(m.entries(0, 0), 0.0);  // slack column
}

TEST(Ptdf, TriangleEqualReactance) {
  const NetworkCase net = parse_case(oracle::triangle_doc());
  const PtdfMatrix m = compute_ptdf(net, Contingency::intact());
  // inject at bus 1, withdraw at slack 3
  EXPECT_NEAR(m.entries(m.row_of(1), 0), 2.0 / 3.0, 1e-12);  // 1-3
  EXPECT_NEAR(m.entries(m.row_of(0), 0), 1.0 / 3.0, 1e-12);  // 1-2
  EXPECT_NEAR(m.entries(m.row_of(2), 0), 1.0 / 3.0, 1e-12);  // 2-3
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_EQ(m.entries(r, 2), 0.0);
}

TEST(Ptdf, TriangleLineOut) {
  const NetworkCase net = parse_case(oracle::triangle_doc());
  const PtdfMatrix m = compute_ptdf(net, Contingency::line_out(1));
  EXPECT_EQ(m.row_of(1), -1);
  EXPECT_NEAR(m.entries(m.row_of(0), 0), 1.0, 1e-12);
  EXPECT_NEAR(m.entries(m.row_of(2), 0), 1.0, 1e-12);
}

TEST(Ptdf, GenOutEqualsIntact) {
  const NetworkCase net = rts24();
  const auto a = compute_ptdf(net, Contingency::intact());
  const auto b = compute_ptdf(net, Contingency::gen_out(3));
  EXPECT_EQ(a.entries, b.entries);
}

TEST(Ptdf, BridgeOutageThrows) {
  const NetworkCase net = oracle::two_bus();
  EXPECT_THROW(compute_ptdf(net, Contingency::line_out(0)), SingularTopology);
}

// Conservation and agreement with a direct B-matrix solve, on every topology of
// rts24 and of random connected graphs.
void check_topologies(const NetworkCase& net, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 50.0);
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  for (const auto& c : enumerate_contingencies(net, {})) {
    const PtdfMatrix m = compute_ptdf(net, c);
    for (Eigen::Index r = 0; r < m.entries.rows(); ++r)
      for (Eigen::Index j = 0; j < n; ++j) EXPECT_LE(std::abs(m.entries(r, j)), 1.0 + 1e-9);
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = nd(rng);
    u[static_cast<Eigen::Index>(net.bus_index(net.slack_bus))] -= u.sum();

    const Eigen::VectorXd partial = m.entries * u;
    Eigen::VectorXd flows = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.lines.size()));
    for (std::size_t r = 0; r < m.line_rows.size(); ++r) flows[static_cast<Eigen::Index>(m.line_rows[r])] = partial[static_cast<Eigen::Index>(r)];
    EXPECT_LT((oracle::nodal_balance(net, flows) - u).cwiseAbs().maxCoeff(), 1e-8) << contingency_key(net, c);

    const std::ptrdiff_t removed = c.kind == Contingency::Kind::LineOut ? static_cast<std::ptrdiff_t>(c.element) : -1;
    EXPECT_LT((oracle::dc_flows(net, removed, u) - flows).cwiseAbs().maxCoeff(), 1e-8) << contingency_key(net, c);
  }
}

TEST(PtdfProperty, Rts24AllTopologies) {
  std::mt19937_64 rng(11);
  check_topologies(rts24(), rng);
}

TEST(PtdfProperty, RandomConnectedGraphs) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const int nb = 3 + static_cast<int>(rng() % 10);
    check_topologies(oracle::random_case(rng, nb, nb), rng);
  }
}

TEST(Susceptance, RowsSumToZero) {
  const NetworkCase net = rts24();
  const Eigen::MatrixXd B = susceptance_matrix(net);
  EXPECT_LT(B.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((B - B.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}
