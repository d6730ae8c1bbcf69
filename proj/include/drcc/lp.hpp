#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace drcc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// min objective·x  s.t.  A x <= b,  A_eq x = b_eq,  lower <= x <= upper.
struct LinearProgram {
  Eigen::VectorXd objective;
  SparseRowMatrix A;
  Eigen::VectorXd b;
  SparseRowMatrix A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_inequalities() const { return A.rows(); }
  Eigen::Index num_equalities() const { return A_eq.rows(); }

  /// Throws DimensionMismatch / ValidationError on inconsistent sizes or NaNs.
  void validate() const;

  /// Largest violation of any row or bound at `x` (0 when feasible).
  double max_violation(const Eigen::VectorXd& x) const;
};

/// Accumulates an LP row by row. Variables default to [0, +inf).
class LpBuilder {
 public:
  explicit LpBuilder(Eigen::Index num_vars);

  Eigen::Index add_variables(Eigen::Index count, double lower = 0.0, double upper = kInf);
  void set_bounds(Eigen::Index var, double lower, double upper);
  void set_cost(Eigen::Index var, double cost) { objective_[var] = cost; }

  using Terms = std::vector<std::pair<Eigen::Index, double>>;
  void add_le(const Terms& terms, double rhs);
  void add_eq(const Terms& terms, double rhs);

  Eigen::Index num_vars() const { return static_cast<Eigen::Index>(objective_.size()); }
  LinearProgram build() const;

 private:
  std::vector<double> objective_, lower_, upper_;
  std::vector<Eigen::Triplet<double>> le_, eq_;
  std::vector<double> le_rhs_, eq_rhs_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::string backend;
};

enum class LpBackend {
  Auto,     // dense simplex for small problems, HiGHS otherwise
  Simplex,  // self-contained dense simplex
  Highs,
};

/// Single entry point for every LP in the library. Throws NumericalFailure when
/// a backend gives up (iteration limit, cycling guard).
LpResult solve_lp(const LinearProgram& lp, LpBackend backend = LpBackend::Auto);

/// Dense two-phase primal simplex with Bland's rule once degeneracy stalls
/// progress. Meant for small problems (tableau is (rows+1) x (cols+1)).
LpResult solve_dense_simplex(const LinearProgram& lp);

LpResult solve_highs(const LinearProgram& lp);

}  // namespace drcc
