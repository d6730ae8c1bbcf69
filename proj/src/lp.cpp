#include "drcc/lp.hpp"

#include <algorithm>
#include <cmath>

#include "drcc/errors.hpp"

namespace drcc {
namespace {

// Above this many tableau entries the dense simplex is no longer the right tool.
constexpr double kDenseTableauLimit = 4.0e5;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

bool no_nan(const SparseRowMatrix& m) {
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseRowMatrix::InnerIterator it(m, k); it; ++it)
      if (!std::isfinite(it.value())) return false;
  return true;
}

}  // namespace

void LinearProgram::validate() const {
  const auto n = num_vars();
  if (A.cols() != n && A.rows() > 0) throw DimensionMismatch("LP: inequality matrix column count");
  if (A_eq.cols() != n && A_eq.rows() > 0) throw DimensionMismatch("LP: equality matrix column count");
  if (b.size() != A.rows()) throw DimensionMismatch("LP: inequality rhs size");
  if (b_eq.size() != A_eq.rows()) throw DimensionMismatch("LP: equality rhs size");
  if (lower.size() != n || upper.size() != n) throw DimensionMismatch("LP: bound vector size");
  if (!all_finite(objective)) throw ValidationError("objective", "non-finite coefficient");
  if (!all_finite(b) || !all_finite(b_eq)) throw ValidationError("rhs", "non-finite right-hand side");
  if (!no_nan(A) || !no_nan(A_eq)) throw ValidationError("matrix", "non-finite coefficient");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
      throw ValidationError("bounds[" + std::to_string(j) + "]", "inconsistent variable bounds");
  }
}

double LinearProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  if (A.rows() > 0) worst = std::max(worst, (A * x - b).maxCoeff());
  if (A_eq.rows() > 0) worst = std::max(worst, (A_eq * x - b_eq).cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lower[j] - x[j]);
    worst = std::max(worst, x[j] - upper[j]);
  }
  return worst;
}

LpBuilder::LpBuilder(Eigen::Index num_vars)
    : objective_(static_cast<std::size_t>(num_vars), 0.0),
      lower_(static_cast<std::size_t>(num_vars), 0.0),
      upper_(static_cast<std::size_t>(num_vars), kInf) {}

Eigen::Index LpBuilder::add_variables(Eigen::Index count, double lower, double upper) {
  const auto first = num_vars();
  objective_.resize(objective_.size() + static_cast<std::size_t>(count), 0.0);
  lower_.resize(lower_.size() + static_cast<std::size_t>(count), lower);
  upper_.resize(upper_.size() + static_cast<std::size_t>(count), upper);
  return first;
}

void LpBuilder::set_bounds(Eigen::Index var, double lower, double upper) {
  lower_.at(static_cast<std::size_t>(var)) = lower;
  upper_.at(static_cast<std::size_t>(var)) = upper;
}

void LpBuilder::add_le(const Terms& terms, double rhs) {
  const auto row = static_cast<Eigen::Index>(le_rhs_.size());
  for (const auto& [var, coef] : terms)
    if (coef != 0.0) le_.emplace_back(row, var, coef);
  le_rhs_.push_back(rhs);
}

void LpBuilder::add_eq(const Terms& terms, double rhs) {
  const auto row = static_cast<Eigen::Index>(eq_rhs_.size());
  for (const auto& [var, coef] : terms)
    if (coef != 0.0) eq_.emplace_back(row, var, coef);
  eq_rhs_.push_back(rhs);
}

LinearProgram LpBuilder::build() const {
  LinearProgram lp;
  const auto n = num_vars();
  lp.objective = Eigen::Map<const Eigen::VectorXd>(objective_.data(), n);
  lp.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), n);
  lp.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), n);
  lp.A.resize(static_cast<Eigen::Index>(le_rhs_.size()), n);
  lp.A.setFromTriplets(le_.begin(), le_.end());
  lp.b = Eigen::Map<const Eigen::VectorXd>(le_rhs_.data(), static_cast<Eigen::Index>(le_rhs_.size()));
  lp.A_eq.resize(static_cast<Eigen::Index>(eq_rhs_.size()), n);
  lp.A_eq.setFromTriplets(eq_.begin(), eq_.end());
  lp.b_eq = Eigen::Map<const Eigen::VectorXd>(eq_rhs_.data(), static_cast<Eigen::Index>(eq_rhs_.size()));
  return lp;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

LpResult solve_lp(const LinearProgram& lp, LpBackend backend) {
  lp.validate();
  if (backend == LpBackend::Auto) {
    Eigen::Index bounded = 0;
    for (Eigen::Index j = 0; j < lp.num_vars(); ++j)
      if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j])) ++bounded;
    const double rows = static_cast<double>(lp.num_inequalities() + lp.num_equalities() + bounded);
    const double cols = static_cast<double>(2 * lp.num_vars() + lp.num_inequalities() + bounded);
    backend = rows * cols <= kDenseTableauLimit ? LpBackend::Simplex : LpBackend::Highs;
  }
  return backend == LpBackend::Simplex ? solve_dense_simplex(lp) : solve_highs(lp);
}

}  // namespace drcc
