#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "drcc/errors.hpp"
#include "drcc/lp.hpp"

namespace drcc {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr int kStallBeforeBland = 50;

// x_j = offset + sum(coef * s_col) over standard-form columns s >= 0.
struct VarMap {
  double offset = 0.0;
  std::vector<std::pair<Eigen::Index, double>> cols;
};

class Tableau {
 public:
  Tableau(Eigen::MatrixXd rows, std::vector<Eigen::Index> basis, Eigen::Index first_artificial)
      : t_(std::move(rows)), basis_(std::move(basis)), first_artificial_(first_artificial) {}

  Eigen::Index num_rows() const { return t_.rows(); }
  Eigen::Index num_cols() const { return t_.cols() - 1; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  double rhs(Eigen::Index r) const { return t_(r, num_cols()); }
  double at(Eigen::Index r, Eigen::Index c) const { return t_(r, c); }
  std::size_t iterations() const { return iterations_; }

  void set_cost(const Eigen::VectorXd& cost) {
    cost_ = cost;
    d_ = cost;
    for (Eigen::Index r = 0; r < num_rows(); ++r) {
      const double cb = cost_[basis_[r]];
      if (cb != 0.0) d_ -= cb * t_.row(r).head(num_cols()).transpose();
    }
  }

  double value() const {
    double z = 0.0;
    for (Eigen::Index r = 0; r < num_rows(); ++r) z += cost_[basis_[r]] * rhs(r);
    return z;
  }

  // Returns false on an unbounded ray. `allow_artificial` is off in phase two.
  bool optimize(bool allow_artificial, std::size_t iteration_limit, double feasible_tol = 0.0) {
    const Eigen::Index n = allow_artificial ? num_cols() : first_artificial_;
    bool bland = false;
    int stall = 0;
    while (true) {
      // phase one is done as soon as the artificials are gone
      if (allow_artificial && value() <= feasible_tol) return true;
      Eigen::Index q = -1;
      double best = -kCostTol;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (d_[j] < best) {
          q = j;
          if (bland) break;
          best = d_[j];
        }
      }
      if (q < 0) return true;

      Eigen::Index r = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < num_rows(); ++i) {
        const double a = t_(i, q);
        if (a <= kPivotTol) continue;
        const double rt = std::max(0.0, rhs(i)) / a;  // round-off can leave tiny negatives
        // ties: Bland needs the lowest index, otherwise take the largest pivot
        const bool tie = r >= 0 && rt <= ratio + 1e-12;
        if (rt < ratio - 1e-12 || (tie && (bland ? basis_[i] < basis_[r] : a > t_(r, q)))) {
          ratio = rt;
          r = i;
        }
      }
      if (r < 0) return false;

      if (ratio <= 1e-12) {
        if (++stall > kStallBeforeBland) bland = true;
      } else {
        stall = 0;
      }
      pivot(r, q);
      if (++iterations_ > iteration_limit)
        throw NumericalFailure("dense simplex: iteration limit reached");
    }
  }

  void pivot(Eigen::Index r, Eigen::Index q) {
    t_.row(r) /= t_(r, q);
    for (Eigen::Index i = 0; i < num_rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, q);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    const double dq = d_[q];
    if (dq != 0.0) d_ -= dq * t_.row(r).head(num_cols()).transpose();
    basis_[r] = q;
  }

  // Pivots basic artificials out at zero level; rows with no usable pivot are
  // redundant and get dropped.
  void purge_artificials() {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < num_rows(); ++r) {
      if (basis_[r] < first_artificial_) {
        keep.push_back(r);
        continue;
      }
      Eigen::Index q = -1;
      double best = kPivotTol;
      for (Eigen::Index j = 0; j < first_artificial_; ++j) {
        if (std::abs(t_(r, j)) > best) {
          best = std::abs(t_(r, j));
          q = j;
        }
      }
      if (q >= 0) {
        pivot(r, q);
        keep.push_back(r);
      }
    }
    if (static_cast<Eigen::Index>(keep.size()) == num_rows()) return;
    Eigen::MatrixXd kept(static_cast<Eigen::Index>(keep.size()), t_.cols());
    std::vector<Eigen::Index> kept_basis;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      kept.row(static_cast<Eigen::Index>(i)) = t_.row(keep[i]);
      kept_basis.push_back(basis_[keep[i]]);
    }
    t_ = std::move(kept);
    basis_ = std::move(kept_basis);
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index first_artificial_;
  Eigen::VectorXd cost_, d_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpResult solve_dense_simplex(const LinearProgram& lp) {
  lp.validate();
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = lp.num_vars();

  std::vector<VarMap> vars(static_cast<std::size_t>(n));
  std::vector<std::pair<Eigen::Index, double>> upper_rows;  // (column, width)
  Eigen::Index ns = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& v = vars[static_cast<std::size_t>(j)];
    const double lo = lp.lower[j], hi = lp.upper[j];
    if (std::isfinite(lo)) {
      v.offset = lo;
      v.cols.emplace_back(ns, 1.0);
      if (std::isfinite(hi)) upper_rows.emplace_back(ns, hi - lo);
      ++ns;
    } else if (std::isfinite(hi)) {
      v.offset = hi;
      v.cols.emplace_back(ns++, -1.0);
    } else {
      v.cols.emplace_back(ns++, 1.0);
      v.cols.emplace_back(ns++, -1.0);
    }
  }

  const Eigen::Index m_le = lp.num_inequalities() + static_cast<Eigen::Index>(upper_rows.size());
  const Eigen::Index m_eq = lp.num_equalities();
  const Eigen::Index m = m_le + m_eq;
  Eigen::Index slack0 = ns;

  // Rows before sign normalisation: [structural | slacks] and rhs.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, ns + m_le);
  Eigen::VectorXd rhs(m);
  Eigen::VectorXd offset(n);
  for (Eigen::Index j = 0; j < n; ++j) offset[j] = vars[static_cast<std::size_t>(j)].offset;

  auto fill = [&](const SparseRowMatrix& a, Eigen::Index src, Eigen::Index dst) {
    for (SparseRowMatrix::InnerIterator it(a, src); it; ++it)
      for (const auto& [col, coef] : vars[static_cast<std::size_t>(it.col())].cols)
        rows(dst, col) += it.value() * coef;
  };
  Eigen::Index r = 0;
  if (lp.num_inequalities() > 0) {
    const Eigen::VectorXd shift = lp.A * offset;
    for (Eigen::Index i = 0; i < lp.num_inequalities(); ++i, ++r) {
      fill(lp.A, i, r);
      rows(r, slack0 + r) = 1.0;
      rhs[r] = lp.b[i] - shift[i];
    }
  }
  for (const auto& [col, width] : upper_rows) {
    rows(r, col) = 1.0;
    rows(r, slack0 + r) = 1.0;
    rhs[r] = width;
    ++r;
  }
  if (m_eq > 0) {
    const Eigen::VectorXd shift = lp.A_eq * offset;
    for (Eigen::Index i = 0; i < m_eq; ++i, ++r) {
      fill(lp.A_eq, i, r);
      rhs[r] = lp.b_eq[i] - shift[i];
    }
  }

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m), -1);
  Eigen::Index n_art = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      rows.row(i) *= -1.0;
      rhs[i] = -rhs[i];
    }
    if (i < m_le && rows(i, slack0 + i) > 0.0)
      basis[static_cast<std::size_t>(i)] = slack0 + i;
    else
      ++n_art;
  }
  const Eigen::Index first_art = ns + m_le;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, first_art + n_art + 1);
  t.leftCols(first_art) = rows;
  t.col(first_art + n_art) = rhs;
  Eigen::Index a = first_art;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] >= 0) continue;
    t(i, a) = 1.0;
    basis[static_cast<std::size_t>(i)] = a++;
  }

  const std::size_t limit = 50 * static_cast<std::size_t>(m + first_art + n_art) + 1000;
  Tableau tab(std::move(t), std::move(basis), first_art);
  LpResult out;
  out.backend = "simplex";

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tab.num_cols());
    phase1.tail(n_art).setOnes();
    tab.set_cost(phase1);
    const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
    tab.optimize(true, limit, 1e-12 * scale);
    if (tab.value() > 1e-7 * scale) {
      out.status = LpStatus::Infeasible;
      out.iterations = tab.iterations();
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return out;
    }
    tab.purge_artificials();
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(tab.num_cols());
  for (Eigen::Index j = 0; j < n; ++j)
    for (const auto& [col, coef] : vars[static_cast<std::size_t>(j)].cols)
      cost[col] += lp.objective[j] * coef;
  tab.set_cost(cost);
  const bool bounded = tab.optimize(false, limit);

  out.iterations = tab.iterations();
  if (!bounded) {
    out.status = LpStatus::Unbounded;
  } else {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(tab.num_cols());
    for (Eigen::Index i = 0; i < tab.num_rows(); ++i)
      s[tab.basis()[static_cast<std::size_t>(i)]] = std::max(0.0, tab.rhs(i));
    out.x.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& v = vars[static_cast<std::size_t>(j)];
      double x = v.offset;
      for (const auto& [col, coef] : v.cols) x += coef * s[col];
      out.x[j] = x;
    }
    out.status = LpStatus::Optimal;
    out.objective = lp.objective.dot(out.x);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace drcc
