#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drcc/network.hpp"
#include "drcc/uncertainty.hpp"

namespace drcc {

inline constexpr const char* kVersion = "1.0.0";

/// Everything one pipeline run needs. Relative paths are resolved against the
/// config file's directory.
struct RunConfig {
  std::filesystem::path case_path;
  std::vector<std::string> contingencies;  // keys; empty means enumerate all
  std::vector<std::vector<std::string>> partition;
  std::vector<int> kappas;
  double epsilon = 0.05;
  double theta = 0.001;
  std::vector<double> thetas{0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1};
  std::string method = "drpoly";
  std::optional<std::filesystem::path> samples_file;
  Eigen::Index n_samples = 50;
  std::optional<std::uint64_t> seed;
  Eigen::Index n_validation = 10000;
  int repeats = 1;
  int jobs = 1;
  std::filesystem::path output = "out";

  // Generator: scalar or per-unit mean, covariance as diagonal/off-diagonal
  // pattern or explicit per-group blocks, truncation from the case supports
  // unless given.
  nlohmann::json generator;

  nlohmann::json raw;  // the parsed document, for hashing
};

RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Checks wind ids, kappas and epsilon against the case. Throws ValidationError.
void validate_config(const RunConfig& cfg, const NetworkCase& net);

std::vector<Contingency> resolve_contingencies(const RunConfig& cfg, const NetworkCase& net);
PartitionSpec make_partition(const RunConfig& cfg, const NetworkCase& net);
GeneratorConfig make_generator(const RunConfig& cfg, const NetworkCase& net);

/// FNV-1a over the canonical dump of the effective config.
std::string config_hash(const RunConfig& cfg);
nlohmann::json effective_json(const RunConfig& cfg);

}  // namespace drcc
