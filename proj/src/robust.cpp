#include "drcc/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "drcc/errors.hpp"

namespace drcc {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Deterministic block Lambda x <= beta into the first rows of an LP.
void copy_deterministic(const CompactProblem& p, Triplets& le, std::vector<double>& b) {
  for (Eigen::Index r = 0; r < p.Lambda.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(p.Lambda, r); it; ++it) le.emplace_back(r, it.col(), it.value());
  b.assign(p.beta.data(), p.beta.data() + p.beta.size());
}

LinearProgram assemble(Eigen::Index n, Eigen::VectorXd objective, const Triplets& le, std::vector<double> b,
                       const Triplets& eq, std::vector<double> beq, Eigen::VectorXd lower, Eigen::VectorXd upper) {
  LinearProgram lp;
  lp.objective = std::move(objective);
  lp.A.resize(static_cast<Eigen::Index>(b.size()), n);
  lp.A.setFromTriplets(le.begin(), le.end());
  lp.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  lp.A_eq.resize(static_cast<Eigen::Index>(beq.size()), n);
  lp.A_eq.setFromTriplets(eq.begin(), eq.end());
  lp.b_eq = Eigen::Map<const Eigen::VectorXd>(beq.data(), static_cast<Eigen::Index>(beq.size()));
  lp.lower = std::move(lower);
  lp.upper = std::move(upper);
  return lp;
}

LinearProgram max_over(const Polyhedron& set, const Eigen::VectorXd& direction) {
  LinearProgram lp;
  const Eigen::Index n = set.G.cols();
  lp.objective = -direction;
  lp.A = set.G.sparseView();
  lp.b = set.g;
  lp.A_eq.resize(0, n);
  lp.b_eq.resize(0);
  lp.lower = Eigen::VectorXd::Constant(n, -kInf);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  return lp;
}

void fill_stats(DispatchSolution& sol, const LpResult& res, const LinearProgram& lp) {
  sol.iterations = res.iterations;
  sol.seconds = res.seconds;
  sol.backend = res.backend;
  sol.lp_vars = lp.num_vars();
  sol.lp_rows = lp.num_inequalities() + lp.num_equalities();
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Which row is worst at a central point: solve the single-scenario problem at
// the center, then measure every row's worst case over the set.
std::string diagnose(const CompactProblem& problem, const Polyhedron& set) {
  Eigen::VectorXd center;
  try {
    center = chebyshev_center(set);
  } catch (const Error& e) {
    return std::string("uncertainty set is empty or unbounded: ") + e.what();
  }
  SampleSet one;
  one.samples = center.transpose();
  const LinearProgram lp = scenario_lp(problem, one);
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    return "dispatch is infeasible even at the set's Chebyshev center (deterministic rows or a single scenario)";
  double worst = -kInf;
  std::size_t worst_k = 0;
  for (std::size_t k = 0; k < problem.K(); ++k) {
    const double v = row_worst_case(problem, k, res.x, set) + problem.uncertain_rows[k].e.dot(res.x) -
                     problem.uncertain_rows[k].h;
    if (v > worst) {
      worst = v;
      worst_k = k;
    }
  }
  if (problem.K() == 0) return "no uncertain rows";
  return "most violated row at the center dispatch: " + problem.row_label(worst_k) + " (family " +
         to_string(problem.uncertain_rows[worst_k].family) + ", excess " + std::to_string(worst) + " MW)";
}

}  // namespace

Polyhedron support_polyhedron(const PartitionSpec& partition) {
  Polyhedron out;
  Eigen::Index rows = 0;
  for (const auto& G : partition.Gamma) rows += G.rows();
  out.G = Eigen::MatrixXd::Zero(rows, partition.dim());
  out.g.resize(rows);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < partition.num_groups(); ++i) {
    const auto& Gamma = partition.Gamma[i];
    for (Eigen::Index a = 0; a < Gamma.rows(); ++a, ++r) {
      for (std::size_t j = 0; j < partition.groups[i].size(); ++j)
        out.G(r, static_cast<Eigen::Index>(partition.groups[i][j])) = Gamma(a, static_cast<Eigen::Index>(j));
      out.g[r] = partition.rho[i][a];
    }
  }
  return out;
}

LinearProgram reformulate_robust(const CompactProblem& problem, const Polyhedron& set) {
  const Eigen::Index n_x = problem.n_x();
  const Eigen::Index q = set.G.rows();
  const auto K = static_cast<Eigen::Index>(problem.K());
  if (set.G.cols() != problem.n_xi || set.g.size() != q)
    throw DimensionMismatch("reformulate_robust: set has " + std::to_string(set.G.cols()) + " columns, problem has n_xi " +
                            std::to_string(problem.n_xi));
  const Eigen::Index n = n_x + K * q;

  Triplets le, eq;
  std::vector<double> b, beq;
  copy_deterministic(problem, le, b);
  le.reserve(le.size() + static_cast<std::size_t>(K * (q + 3 * problem.layout.n_gen)));
  eq.reserve(static_cast<std::size_t>(K * problem.n_xi * (problem.layout.n_gen + 4)));
  beq.reserve(static_cast<std::size_t>(K * problem.n_xi));

  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& row = problem.uncertain_rows[static_cast<std::size_t>(k)];
    const Eigen::Index y0 = n_x + k * q;
    const auto r = static_cast<Eigen::Index>(b.size());
    for (Eigen::SparseVector<double>::InnerIterator it(row.e); it; ++it) le.emplace_back(r, it.index(), it.value());
    for (Eigen::Index t = 0; t < q; ++t)
      if (set.g[t] != 0.0) le.emplace_back(r, y0 + t, set.g[t]);
    b.push_back(row.h);

    for (Eigen::Index j = 0; j < problem.n_xi; ++j) {
      const auto re = static_cast<Eigen::Index>(beq.size());
      for (Eigen::SparseMatrix<double>::InnerIterator it(row.F, j); it; ++it) eq.emplace_back(re, it.row(), it.value());
      for (Eigen::Index t = 0; t < q; ++t)
        if (set.G(t, j) != 0.0) eq.emplace_back(re, y0 + t, -set.G(t, j));
      beq.push_back(-row.f[j]);
    }
  }
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(n);
  objective.head(n_x) = problem.c;
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(n), upper = Eigen::VectorXd::Constant(n, kInf);
  lower.head(n_x).setConstant(-kInf);
  return assemble(n, std::move(objective), le, std::move(b), eq, std::move(beq), std::move(lower), std::move(upper));
}

LinearProgram reformulate_robust(const CompactProblem& problem, const RobustSet& set) {
  return reformulate_robust(problem, Polyhedron{set.G, set.g});
}

LinearProgram scenario_lp(const CompactProblem& problem, const SampleSet& samples) {
  const Eigen::Index n_x = problem.n_x();
  if (samples.dim() != problem.n_xi) throw DimensionMismatch("scenario_lp: sample width differs from n_xi");
  Triplets le;
  std::vector<double> b;
  copy_deterministic(problem, le, b);
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(n_x);
  std::vector<Eigen::Index> touched;
  for (std::size_t k = 0; k < problem.K(); ++k) {
    const auto& row = problem.uncertain_rows[k];
    for (Eigen::Index m = 0; m < samples.size(); ++m) {
      const auto r = static_cast<Eigen::Index>(b.size());
      touched.clear();
      for (Eigen::SparseVector<double>::InnerIterator it(row.e); it; ++it) {
        coef[it.index()] += it.value();
        touched.push_back(it.index());
      }
      for (Eigen::Index j = 0; j < row.F.outerSize(); ++j) {
        const double xi = samples.samples(m, j);
        for (Eigen::SparseMatrix<double>::InnerIterator it(row.F, j); it; ++it) {
          coef[it.row()] += it.value() * xi;
          touched.push_back(it.row());
        }
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (auto i : touched) {
        if (coef[i] != 0.0) le.emplace_back(r, i, coef[i]);
        coef[i] = 0.0;
      }
      b.push_back(row.h - row.f.dot(samples.samples.row(m).transpose()));
    }
  }
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(n_x, -kInf), upper = Eigen::VectorXd::Constant(n_x, kInf);
  return assemble(n_x, problem.c, le, std::move(b), {}, {}, std::move(lower), std::move(upper));
}

DispatchSolution decode(const CompactProblem& problem, const Eigen::VectorXd& x) {
  if (x.size() < problem.n_x()) throw DimensionMismatch("decode: decision vector too short");
  const auto& L = problem.layout;
  DispatchSolution sol;
  sol.x = x.head(problem.n_x());
  const auto ng = static_cast<Eigen::Index>(L.n_gen), nc = static_cast<Eigen::Index>(L.n_cont);
  sol.p.resize(ng);
  sol.r_plus.resize(ng);
  sol.r_minus.resize(ng);
  sol.r_con.resize(ng);
  sol.alpha.resize(nc, ng);
  sol.delta.resize(nc, ng);
  for (std::size_t g = 0; g < L.n_gen; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    sol.p[gi] = x[L.p(g)];
    sol.r_plus[gi] = x[L.r_plus(g)];
    sol.r_minus[gi] = x[L.r_minus(g)];
    sol.r_con[gi] = x[L.r_con(g)];
    for (std::size_t c = 0; c < L.n_cont; ++c) {
      sol.alpha(static_cast<Eigen::Index>(c), gi) = x[L.alpha(c, g)];
      sol.delta(static_cast<Eigen::Index>(c), gi) = x[L.delta(c, g)];
    }
  }
  sol.cost = problem.c.dot(sol.x);
  return sol;
}

DispatchSolution solve_robust(const CompactProblem& problem, const Polyhedron& set, const std::string& method,
                              LpBackend backend) {
  const LinearProgram lp = reformulate_robust(problem, set);
  const LpResult res = solve_lp(lp, backend);
  if (res.status == LpStatus::Infeasible)
    throw InfeasibleRobust(method + ": robust counterpart is infeasible; " + diagnose(problem, set));
  if (res.status != LpStatus::Optimal) throw SolverFailure(method + ": robust LP is " + to_string(res.status));
  DispatchSolution sol = decode(problem, res.x);
  sol.method = method;
  sol.status = res.status;
  fill_stats(sol, res, lp);
  const Eigen::Index q = set.G.rows();
  sol.y.resize(static_cast<Eigen::Index>(problem.K()), q);
  for (Eigen::Index k = 0; k < sol.y.rows(); ++k) sol.y.row(k) = res.x.segment(problem.n_x() + k * q, q).transpose();
  sol.audit = duality_audit(problem, sol.x, set);
  if (!sol.audit.passed)
    spdlog::warn("{}: semi-infinite audit excess {:.3e} on {}", method, sol.audit.max_excess,
                 problem.row_label(sol.audit.worst_row));
  return sol;
}

DispatchSolution solve_drpoly(const CompactProblem& problem, const RobustSet& set, LpBackend backend) {
  DispatchSolution sol = solve_robust(problem, Polyhedron{set.G, set.g}, "drpoly", backend);
  sol.theta = set.theta;
  return sol;
}

DispatchSolution solve_worstcase(const CompactProblem& problem, const PartitionSpec& partition, LpBackend backend) {
  return solve_robust(problem, support_polyhedron(partition), "worstcase", backend);
}

DispatchSolution solve_scenario(const CompactProblem& problem, const SampleSet& samples, LpBackend backend) {
  if (samples.size() < 1) throw TooFewSamples("scenario method needs at least one sample");
  const LinearProgram lp = scenario_lp(problem, samples);
  const LpResult res = solve_lp(lp, backend);
  if (res.status == LpStatus::Infeasible)
    throw InfeasibleScenario("scenario LP over " + std::to_string(samples.size()) + " samples is infeasible");
  if (res.status != LpStatus::Optimal) throw SolverFailure(std::string("scenario LP is ") + to_string(res.status));
  DispatchSolution sol = decode(problem, res.x);
  sol.method = "scenario";
  sol.status = res.status;
  fill_stats(sol, res, lp);
  return sol;
}

double row_worst_case(const CompactProblem& problem, std::size_t k, const Eigen::VectorXd& x, const Polyhedron& set) {
  const Eigen::VectorXd dir = problem.uncertain_rows.at(k).xi_coefficients(x);
  if (dir.size() == 0) return 0.0;
  const LpResult res = solve_lp(max_over(set, dir));
  if (res.status == LpStatus::Unbounded) return kInf;
  if (res.status != LpStatus::Optimal) throw SolverFailure("row_worst_case: uncertainty set is empty");
  return -res.objective;
}

AuditResult duality_audit(const CompactProblem& problem, const Eigen::VectorXd& x, const Polyhedron& set,
                          std::size_t n_rows, std::uint64_t seed, double tol) {
  std::vector<std::size_t> rows(problem.K());
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() > n_rows) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n_rows; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
      std::swap(rows[i], rows[pick(rng)]);
    }
    rows.resize(n_rows);
  }
  AuditResult out;
  out.max_excess = -kInf;
  for (auto k : rows) {
    const auto& row = problem.uncertain_rows[k];
    const double excess = row_worst_case(problem, k, x, set) + row.e.dot(x) - row.h;
    if (excess > out.max_excess) {
      out.max_excess = excess;
      out.worst_row = k;
    }
  }
  out.rows_checked = rows.size();
  if (rows.empty()) out.max_excess = 0.0;
  out.passed = out.max_excess <= tol;
  return out;
}

double deterministic_violation(const CompactProblem& problem, const Eigen::VectorXd& x) {
  if (problem.Lambda.rows() == 0) return 0.0;
  return std::max(0.0, (problem.Lambda * x - problem.beta).maxCoeff());
}

Eigen::VectorXd chebyshev_center(const Polyhedron& set) {
  const Eigen::Index n = set.G.cols();
  LpBuilder lp(n + 1);
  for (Eigen::Index j = 0; j < n; ++j) lp.set_bounds(j, -kInf, kInf);
  lp.set_cost(n, -1.0);
  for (Eigen::Index r = 0; r < set.G.rows(); ++r) {
    LpBuilder::Terms t;
    for (Eigen::Index j = 0; j < n; ++j)
      if (set.G(r, j) != 0.0) t.emplace_back(j, set.G(r, j));
    t.emplace_back(n, set.G.row(r).norm());
    lp.add_le(t, set.g[r]);
  }
  const LpResult res = solve_lp(lp.build());
  if (res.status != LpStatus::Optimal) throw SolverFailure(std::string("chebyshev_center: LP is ") + to_string(res.status));
  return res.x.head(n);
}

nlohmann::json to_json(const DispatchSolution& sol, const CompactProblem& problem) {
  nlohmann::json gens = nlohmann::json::array();
  for (std::size_t g = 0; g < problem.layout.n_gen; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    gens.push_back({{"id", problem.generator_ids[g]},
                    {"p", sol.p[gi]},
                    {"r_plus", sol.r_plus[gi]},
                    {"r_minus", sol.r_minus[gi]},
                    {"r_con", sol.r_con[gi]}});
  }
  nlohmann::json conts = nlohmann::json::array();
  for (std::size_t c = 0; c < problem.layout.n_cont; ++c) {
    nlohmann::json alpha = nlohmann::json::object(), delta = nlohmann::json::object();
    for (std::size_t g = 0; g < problem.layout.n_gen; ++g) {
      alpha[problem.generator_ids[g]] = sol.alpha(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g));
      delta[problem.generator_ids[g]] = sol.delta(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g));
    }
    conts.push_back({{"key", problem.contingency_keys[c]}, {"alpha", alpha}, {"delta", delta}});
  }
  return {{"method", sol.method},
          {"theta", sol.theta},
          {"status", to_string(sol.status)},
          {"cost", sol.cost},
          {"generators", gens},
          {"contingencies", conts},
          {"x", to_vec(sol.x)},
          {"solver",
           {{"backend", sol.backend},
            {"iterations", sol.iterations},
            {"seconds", sol.seconds},
            {"lp_vars", sol.lp_vars},
            {"lp_rows", sol.lp_rows}}},
          {"audit",
           {{"rows_checked", sol.audit.rows_checked},
            {"max_excess", sol.audit.max_excess},
            {"passed", sol.audit.passed}}}};
}

DispatchSolution solution_from_json(const nlohmann::json& doc, const CompactProblem& problem) {
  try {
    const auto xv = doc.at("x").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(xv.size()) != problem.n_x())
      throw DimensionMismatch("solution has " + std::to_string(xv.size()) + " decision values, problem needs " +
                              std::to_string(problem.n_x()));
    DispatchSolution sol = decode(problem, Eigen::Map<const Eigen::VectorXd>(xv.data(), problem.n_x()));
    sol.method = doc.value("method", "");
    sol.theta = doc.value("theta", 0.0);
    sol.status = LpStatus::Optimal;
    return sol;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
}

}  // namespace drcc
