#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "drcc/compact.hpp"
#include "drcc/dr_set.hpp"
#include "drcc/lp.hpp"
#include "drcc/uncertainty.hpp"

namespace drcc {

/// {xi : G xi <= g}.
struct Polyhedron {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
};

/// Support blocks (Gamma^i, rho^i) lifted to full xi coordinates.
Polyhedron support_polyhedron(const PartitionSpec& partition);

struct AuditResult {
  std::size_t rows_checked = 0;
  double max_excess = 0.0;  // max over checked rows of (worst-case lhs - h)
  std::size_t worst_row = 0;
  bool passed = true;
};

struct DispatchSolution {
  std::string method;
  double theta = 0.0;
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd p, r_plus, r_minus, r_con;
  Eigen::MatrixXd alpha, delta;  // contingency x generator
  Eigen::MatrixXd y;             // K x q dual block (robust methods only)
  double cost = 0.0;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::string backend;
  Eigen::Index lp_vars = 0;
  Eigen::Index lp_rows = 0;
  AuditResult audit;
};

/// x, then y_k >= 0 (q per uncertain row). Rows: Lambda x <= beta,
/// g'y_k + e_k'x <= h_k, and F_k'x - G'y_k = -f_k.
LinearProgram reformulate_robust(const CompactProblem& problem, const Polyhedron& set);
LinearProgram reformulate_robust(const CompactProblem& problem, const RobustSet& set);

/// Scenario LP: Lambda x <= beta plus (e_k + F_k xi_m)'x <= h_k - f_k'xi_m.
LinearProgram scenario_lp(const CompactProblem& problem, const SampleSet& samples);

DispatchSolution decode(const CompactProblem& problem, const Eigen::VectorXd& x);

/// Throws InfeasibleRobust naming the most violated row at the Chebyshev
/// center of the set.
DispatchSolution solve_robust(const CompactProblem& problem, const Polyhedron& set, const std::string& method,
                              LpBackend backend = LpBackend::Auto);
DispatchSolution solve_drpoly(const CompactProblem& problem, const RobustSet& set,
                              LpBackend backend = LpBackend::Auto);
DispatchSolution solve_worstcase(const CompactProblem& problem, const PartitionSpec& partition,
                                 LpBackend backend = LpBackend::Auto);
/// Throws InfeasibleScenario.
DispatchSolution solve_scenario(const CompactProblem& problem, const SampleSet& samples,
                                LpBackend backend = LpBackend::Auto);

/// Worst case of row k over the set with x fixed: max (f_k + F_k'x)'xi.
double row_worst_case(const CompactProblem& problem, std::size_t k, const Eigen::VectorXd& x, const Polyhedron& set);

/// Checks `n_rows` randomly chosen uncertain rows (all when K is smaller)
/// against the set by an inner LP each.
AuditResult duality_audit(const CompactProblem& problem, const Eigen::VectorXd& x, const Polyhedron& set,
                          std::size_t n_rows = 200, std::uint64_t seed = 0x5eed, double tol = 1e-6);

/// Largest violation of Lambda x <= beta.
double deterministic_violation(const CompactProblem& problem, const Eigen::VectorXd& x);

/// Center of the largest Euclidean ball inside the polyhedron.
Eigen::VectorXd chebyshev_center(const Polyhedron& set);

nlohmann::json to_json(const DispatchSolution& sol, const CompactProblem& problem);
/// Restores the decision vector and metadata written by to_json.
DispatchSolution solution_from_json(const nlohmann::json& doc, const CompactProblem& problem);

}  // namespace drcc
