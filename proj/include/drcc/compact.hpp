#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "drcc/lp.hpp"
#include "drcc/network.hpp"

namespace drcc {

/// Coordinates of the named decision variables inside x.
/// Order: p, r+, r-, rcon (one block of |G| each), then alpha and delta
/// (one |G| block per contingency each).
struct DecisionLayout {
  std::size_t n_gen = 0;
  std::size_t n_cont = 0;

  Eigen::Index p(std::size_t g) const { return idx(g); }
  Eigen::Index r_plus(std::size_t g) const { return idx(n_gen + g); }
  Eigen::Index r_minus(std::size_t g) const { return idx(2 * n_gen + g); }
  Eigen::Index r_con(std::size_t g) const { return idx(3 * n_gen + g); }
  Eigen::Index alpha(std::size_t c, std::size_t g) const { return idx(4 * n_gen + c * n_gen + g); }
  Eigen::Index delta(std::size_t c, std::size_t g) const {
    return idx(4 * n_gen + n_cont * n_gen + c * n_gen + g);
  }
  Eigen::Index n_x() const { return idx(4 * n_gen + 2 * n_cont * n_gen); }

  bool is_alpha(Eigen::Index i) const {
    return i >= alpha(0, 0) && i < idx(4 * n_gen + n_cont * n_gen);
  }

  /// e.g. `p[g1]`, `alpha[line:1-2][g3]`.
  std::string name(Eigen::Index i, const std::vector<std::string>& gen_ids,
                   const std::vector<std::string>& cont_keys) const;

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
};

enum class RowFamily { ReserveUp, ReserveDown, LineUpper, LineLower };

const char* to_string(RowFamily family);

/// One uncertain constraint e'x + f'xi + x'F xi <= h.
struct UncertainRow {
  Eigen::SparseVector<double> e;
  Eigen::VectorXd f;
  Eigen::SparseMatrix<double> F;  // n_x x n_xi, nonzeros only in alpha rows
  double h = 0.0;
  RowFamily family = RowFamily::ReserveUp;
  std::size_t contingency = 0;  // index into CompactProblem::contingencies
  std::size_t element = 0;      // generator index (reserve rows) or line index

  /// Coefficient vector of xi once x is fixed: f + F'x.
  Eigen::VectorXd xi_coefficients(const Eigen::VectorXd& x) const;
};

struct CompactProblem {
  Eigen::VectorXd c;
  SparseRowMatrix Lambda;
  Eigen::VectorXd beta;
  std::vector<std::string> det_labels;
  std::vector<UncertainRow> uncertain_rows;
  double epsilon = 0.05;
  DecisionLayout layout;
  Eigen::Index n_xi = 0;

  std::vector<Contingency> contingencies;
  std::vector<std::string> contingency_keys;
  std::vector<std::string> generator_ids;
  std::vector<std::string> line_ids;
  Eigen::VectorXd forecast;  // per wind unit
  std::vector<std::string> diagnostics;

  std::size_t K() const { return uncertain_rows.size(); }
  Eigen::Index n_x() const { return layout.n_x(); }
  std::string row_label(std::size_t k) const;
};

/// Builds the compact form of the chance-constrained dispatch. `ptdfs[i]` must
/// belong to `contingencies[i]`. With no wind units the uncertain rows are
/// merged into Lambda and K is zero.
CompactProblem build_compact(const NetworkCase& net, const std::vector<Contingency>& contingencies,
                             const std::vector<PtdfMatrix>& ptdfs, double epsilon);

/// Convenience: enumerates nothing, computes the PTDFs itself.
CompactProblem build_compact(const NetworkCase& net, const std::vector<Contingency>& contingencies,
                             double epsilon);

/// e'x + f'xi + x'F xi - h; nonpositive means satisfied.
double evaluate_row(const CompactProblem& problem, std::size_t k, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xi);

/// Human-readable listing of every row, for `--dump-lp`.
std::string dump_listing(const CompactProblem& problem);

}  // namespace drcc
