#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drcc/compact.hpp"
#include "drcc/robust.hpp"
#include "drcc/uncertainty.hpp"

namespace drcc {

inline constexpr double kViolationTol = 1e-6;

struct ViolationReport {
  Eigen::Index n_validation = 0;
  Eigen::Index n_violated = 0;
  double violation_frequency = 0.0;
  double tol = kViolationTol;
  /// Samples violating at least one row of each family (indexed by RowFamily).
  std::array<Eigen::Index, 4> family_counts{};
  /// Contingencies ordered by how many samples violate one of their rows.
  std::vector<std::pair<std::string, Eigen::Index>> worst_contingencies;
};

/// A sample violates when any uncertain row exceeds `tol`.
ViolationReport violation_frequency(const CompactProblem& problem, const Eigen::VectorXd& x,
                                    const SampleSet& validation, double tol = kViolationTol);

struct SweepConfig {
  PartitionSpec partition;
  GeneratorConfig generator;
  Eigen::Index n_train = 50;
  Eigen::Index n_validation = 10000;
  std::vector<double> thetas;
  std::vector<int> kappas;
  double epsilon = 0.05;
  int repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  LpBackend backend = LpBackend::Auto;
};

/// Training draw for repeat r uses stream 2r+1; validation uses stream 0.
std::uint64_t training_seed(std::uint64_t base, int repeat);
std::uint64_t validation_seed(std::uint64_t base);

struct SweepRecord {
  std::string method;
  double theta = 0.0;  // NaN for the scenario method
  int repeat = 0;
  double cost = 0.0;
  double violation_freq = 0.0;
  std::size_t n_dr = 0;
  std::string status;  // "optimal" or the failure class
};

struct ParetoRow {
  double theta = 0.0;
  double mean_cost = 0.0;
  double cost_std = 0.0;
  double mean_violation = 0.0;
  double violation_std = 0.0;
  int n_repeats = 0;
};

struct ParetoTable {
  std::string method;
  std::vector<ParetoRow> rows;  // theta ascending
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ordered by (repeat, theta, method)
  std::vector<ParetoTable> tables;   // drpoly, drbox, scenario
};

/// Per repeat: fresh training draw, drpoly and drbox per theta, scenario once,
/// all validated on one held-out draw. Cell failures are recorded, not thrown.
SweepResult pareto_sweep(const CompactProblem& problem, const SweepConfig& config);

std::vector<ParetoTable> aggregate(const std::vector<SweepRecord>& records);

struct MethodReport {
  std::string method;
  double theta = 0.0;
  double cost = 0.0;
  ViolationReport report;
};

/// Stable sort by cost; equal costs keep input order.
std::vector<MethodReport> compare_methods(std::vector<MethodReport> reports);
std::string comparison_csv(const std::vector<MethodReport>& reports);

std::string pareto_csv(const std::vector<SweepRecord>& records);
std::string summary_csv(const std::vector<ParetoTable>& tables);

}  // namespace drcc
