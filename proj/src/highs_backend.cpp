#include <chrono>
#include <string>

#include <Highs.h>

#include "drcc/errors.hpp"
#include "drcc/lp.hpp"

namespace drcc {
namespace {

HighsLp to_highs(const LinearProgram& lp) {
  HighsLp h;
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = lp.num_inequalities() + lp.num_equalities();
  h.num_col_ = static_cast<HighsInt>(n);
  h.num_row_ = static_cast<HighsInt>(m);
  h.col_cost_.assign(lp.objective.data(), lp.objective.data() + n);
  h.col_lower_.assign(lp.lower.data(), lp.lower.data() + n);
  h.col_upper_.assign(lp.upper.data(), lp.upper.data() + n);
  h.row_lower_.assign(static_cast<std::size_t>(m), -kHighsInf);
  h.row_upper_.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < lp.num_inequalities(); ++i) h.row_upper_[static_cast<std::size_t>(i)] = lp.b[i];
  for (Eigen::Index i = 0; i < lp.num_equalities(); ++i) {
    const auto k = static_cast<std::size_t>(lp.num_inequalities() + i);
    h.row_lower_[k] = lp.b_eq[i];
    h.row_upper_[k] = lp.b_eq[i];
  }

  Eigen::SparseMatrix<double, Eigen::ColMajor> stacked(m, n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(lp.A.nonZeros() + lp.A_eq.nonZeros()));
  for (Eigen::Index i = 0; i < lp.A.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(lp.A, i); it; ++it) trip.emplace_back(i, it.col(), it.value());
  for (Eigen::Index i = 0; i < lp.A_eq.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(lp.A_eq, i); it; ++it)
      trip.emplace_back(lp.num_inequalities() + i, it.col(), it.value());
  stacked.setFromTriplets(trip.begin(), trip.end());
  stacked.makeCompressed();

  h.a_matrix_.format_ = MatrixFormat::kColwise;
  h.a_matrix_.num_col_ = h.num_col_;
  h.a_matrix_.num_row_ = h.num_row_;
  h.a_matrix_.start_.assign(stacked.outerIndexPtr(), stacked.outerIndexPtr() + n + 1);
  h.a_matrix_.index_.assign(stacked.innerIndexPtr(), stacked.innerIndexPtr() + stacked.nonZeros());
  h.a_matrix_.value_.assign(stacked.valuePtr(), stacked.valuePtr() + stacked.nonZeros());
  h.sense_ = ObjSense::kMinimize;
  return h;
}

HighsModelStatus run(Highs& highs, bool presolve) {
  highs.setOptionValue("presolve", presolve ? "on" : "off");
  if (!presolve) highs.setOptionValue("solver", "simplex");
  const HighsStatus st = highs.run();
  if (st == HighsStatus::kError) throw NumericalFailure("HiGHS: solver error");
  return highs.getModelStatus();
}

}  // namespace

LpResult solve_highs(const LinearProgram& lp) {
  lp.validate();
  const auto start = std::chrono::steady_clock::now();
  Highs highs;
  highs.setOptionValue("output_flag", false);
  highs.setOptionValue("threads", 1);
  highs.setOptionValue("random_seed", 0);
  if (highs.passModel(to_highs(lp)) == HighsStatus::kError) throw NumericalFailure("HiGHS: model rejected");

  HighsModelStatus ms = run(highs, true);
  if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
    highs.clearSolver();
    ms = run(highs, false);
  }

  LpResult out;
  out.backend = "highs";
  const HighsInfo& info = highs.getInfo();
  out.iterations = static_cast<std::size_t>(std::max<HighsInt>(0, info.simplex_iteration_count) +
                                            std::max<HighsInt>(0, info.ipm_iteration_count));
  switch (ms) {
    case HighsModelStatus::kOptimal:
      out.status = LpStatus::Optimal;
      out.x = Eigen::Map<const Eigen::VectorXd>(highs.getSolution().col_value.data(), lp.num_vars());
      out.objective = lp.objective.dot(out.x);
      break;
    case HighsModelStatus::kInfeasible:
      out.status = LpStatus::Infeasible;
      break;
    case HighsModelStatus::kUnbounded:
    case HighsModelStatus::kUnboundedOrInfeasible:
      out.status = LpStatus::Unbounded;
      break;
    case HighsModelStatus::kModelEmpty:
      out.status = LpStatus::Optimal;
      out.x = Eigen::VectorXd::Zero(lp.num_vars());
      break;
    default:
      throw NumericalFailure("HiGHS: " + highs.modelStatusToString(ms));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace drcc
