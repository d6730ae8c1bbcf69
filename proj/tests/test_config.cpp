#include <gtest/gtest.h>

#include "drcc/config.hpp"
#include "drcc/errors.hpp"
#include "oracles.hpp"

using namespace drcc;
using nlohmann::json;

namespace {

json base() {
  return {{"case", "case.json"},
          {"partition", {{"w1", "w2"}, {"w3"}}},
          {"kappa", {1, 0}},
          {"samples", {{"n", 20}, {"seed", 4}}},
          {"generator", {{"mean", 20.0}, {"covariance", {{"diagonal", 16.0}, {"off_diagonal", 12.0}}}}}};
}

}  // namespace

TEST(Config, DefaultsAndPaths) {
  const RunConfig cfg = parse_config(json{{"case", "data/x.json"}}, "/tmp/cfgdir");
  EXPECT_EQ(cfg.case_path, std::filesystem::path("/tmp/cfgdir/data/x.json"));
  EXPECT_EQ(cfg.thetas, (std::vector<double>{0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1}));
  EXPECT_EQ(cfg.epsilon, 0.05);
  EXPECT_EQ(cfg.n_validation, 10000);
  EXPECT_FALSE(cfg.seed.has_value());
  EXPECT_EQ(parse_config(json{{"case", "/abs.json"}}, "/tmp").case_path, std::filesystem::path("/abs.json"));
  EXPECT_THROW(parse_config(json::object()), ParseError);
  EXPECT_THROW(parse_config(json{{"case", "x"}, {"epsilon", "high"}}), ParseError);
}

TEST(Config, Validation) {
  const NetworkCase net = oracle::small_wind_case(3);
  RunConfig cfg = parse_config(base());
  EXPECT_NO_THROW(validate_config(cfg, net));

  RunConfig bad_id = parse_config(base());
  bad_id.partition[1] = {"w9"};
  EXPECT_THROW(validate_config(bad_id, net), ValidationError);

  RunConfig missing = parse_config(base());
  missing.partition.pop_back();
  missing.kappas = {1};
  EXPECT_THROW(validate_config(missing, net), ValidationError);

  RunConfig kappa = parse_config(base());
  kappa.kappas = {2, 0};
  EXPECT_THROW(validate_config(kappa, net), KappaOutOfRange);

  RunConfig eps = parse_config(base());
  eps.epsilon = 1.0;
  EXPECT_THROW(validate_config(eps, net), ValidationError);

  RunConfig method = parse_config(base());
  method.method = "magic";
  EXPECT_THROW(validate_config(method, net), ValidationError);
}

TEST(Config, PartitionAndGenerator) {
  const NetworkCase net = oracle::small_wind_case(3);
  const RunConfig cfg = parse_config(base());
  const PartitionSpec p = make_partition(cfg, net);
  ASSERT_EQ(p.num_groups(), 2u);
  EXPECT_EQ(p.groups[0], (IndexGroup{0, 1}));
  const GeneratorConfig g = make_generator(cfg, net);
  EXPECT_EQ(g.mean, Eigen::Vector3d::Constant(20.0));
  EXPECT_EQ(g.lower, Eigen::Vector3d::Constant(10.0));  // from the case supports
  EXPECT_EQ(g.covariance[0](0, 1), 12.0);
  EXPECT_EQ(g.covariance[1](0, 0), 16.0);
}

TEST(Config, ContingencyResolution) {
  const NetworkCase net = oracle::small_wind_case(2);
  RunConfig cfg = parse_config(base());
  EXPECT_EQ(resolve_contingencies(cfg, net).size(), enumerate_contingencies(net, {}).size());
  cfg.contingencies = {"intact", "gen:g2"};
  const auto cs = resolve_contingencies(cfg, net);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[1], Contingency::gen_out(1));
}

TEST(Config, HashTracksEffectiveSettings) {
  const RunConfig a = parse_config(base());
  RunConfig b = parse_config(base());
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.theta = 0.5;
  EXPECT_NE(config_hash(a), config_hash(b));
}
