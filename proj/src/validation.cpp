#include "drcc/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "drcc/dr_set.hpp"
#include "drcc/errors.hpp"

namespace drcc {
namespace {

constexpr Eigen::Index kChunk = 1000;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string failure_class(const std::exception& e) {
  if (dynamic_cast<const BudgetInfeasible*>(&e)) return "budget_infeasible";
  if (dynamic_cast<const InfeasibleRobust*>(&e)) return "infeasible_robust";
  if (dynamic_cast<const InfeasibleScenario*>(&e)) return "infeasible_scenario";
  if (dynamic_cast<const NumericalFailure*>(&e)) return "numerical_failure";
  return "error";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

struct Cell {
  int repeat;
  std::size_t theta;  // index into thetas; thetas.size() marks scenario
  int method;         // 0 drpoly, 1 drbox, 2 scenario
};

const char* kMethods[] = {"drpoly", "drbox", "scenario"};

}  // namespace

ViolationReport violation_frequency(const CompactProblem& problem, const Eigen::VectorXd& x,
                                    const SampleSet& validation, double tol) {
  if (x.size() != problem.n_x()) throw DimensionMismatch("violation_frequency: decision vector length");
  if (validation.dim() != problem.n_xi && validation.size() > 0)
    throw DimensionMismatch("violation_frequency: sample width differs from n_xi");
  ViolationReport rep;
  rep.tol = tol;
  rep.n_validation = validation.size();
  const auto K = static_cast<Eigen::Index>(problem.K());
  if (rep.n_validation == 0) return rep;

  Eigen::MatrixXd C(K, problem.n_xi);
  Eigen::VectorXd a(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& row = problem.uncertain_rows[static_cast<std::size_t>(k)];
    C.row(k) = row.xi_coefficients(x).transpose();
    a[k] = row.e.dot(x) - row.h;
  }
  std::vector<Eigen::Index> per_cont(problem.contingencies.size(), 0);
  std::vector<char> cont_hit(problem.contingencies.size());
  for (Eigen::Index start = 0; start < rep.n_validation; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, rep.n_validation - start);
    Eigen::MatrixXd v = C * validation.samples.middleRows(start, len).transpose();
    v.colwise() += a;
    for (Eigen::Index m = 0; m < len; ++m) {
      bool any = false;
      std::array<bool, 4> fam{};
      std::fill(cont_hit.begin(), cont_hit.end(), 0);
      for (Eigen::Index k = 0; k < K; ++k) {
        if (v(k, m) <= tol) continue;
        any = true;
        const auto& row = problem.uncertain_rows[static_cast<std::size_t>(k)];
        fam[static_cast<std::size_t>(row.family)] = true;
        cont_hit[row.contingency] = 1;
      }
      if (!any) continue;
      ++rep.n_violated;
      for (std::size_t f = 0; f < 4; ++f) rep.family_counts[f] += fam[f];
      for (std::size_t c = 0; c < cont_hit.size(); ++c) per_cont[c] += cont_hit[c];
    }
  }
  rep.violation_frequency = static_cast<double>(rep.n_violated) / static_cast<double>(rep.n_validation);
  for (std::size_t c = 0; c < per_cont.size(); ++c)
    if (per_cont[c] > 0) rep.worst_contingencies.emplace_back(problem.contingency_keys[c], per_cont[c]);
  std::stable_sort(rep.worst_contingencies.begin(), rep.worst_contingencies.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  if (rep.worst_contingencies.size() > 5) rep.worst_contingencies.resize(5);
  return rep;
}

std::uint64_t training_seed(std::uint64_t base, int repeat) {
  return derive_seed(base, 2 * static_cast<std::uint64_t>(repeat) + 1);
}

std::uint64_t validation_seed(std::uint64_t base) { return derive_seed(base, 0); }

SweepResult pareto_sweep(const CompactProblem& problem, const SweepConfig& config) {
  if (config.repeats < 1) throw ValidationError("repeats", "must be at least 1");
  if (config.n_validation < 1) throw TooFewSamples("pareto_sweep: validation set is empty");
  std::vector<double> thetas = config.thetas;
  std::sort(thetas.begin(), thetas.end());

  const SampleSet validation = generate_samples(config.generator, config.n_validation, validation_seed(config.seed));
  std::vector<SampleSet> training;
  for (int r = 0; r < config.repeats; ++r)
    training.push_back(generate_samples(config.generator, config.n_train, training_seed(config.seed, r)));

  std::vector<Cell> cells;
  for (int r = 0; r < config.repeats; ++r) {
    for (std::size_t t = 0; t < thetas.size(); ++t)
      for (int m = 0; m < 2; ++m) cells.push_back({r, t, m});
    cells.push_back({r, thetas.size(), 2});
  }
  std::vector<SweepRecord> records(cells.size());
  const std::vector<int> box_kappas(config.partition.num_groups(), 0);

  auto run_cell = [&](std::size_t i) {
    const Cell& cell = cells[i];
    SweepRecord& rec = records[i];
    rec.method = kMethods[cell.method];
    rec.repeat = cell.repeat;
    rec.theta = cell.method == 2 ? kNaN : thetas[cell.theta];
    rec.cost = kNaN;
    rec.violation_freq = kNaN;
    try {
      const SampleSet& train = training[static_cast<std::size_t>(cell.repeat)];
      DispatchSolution sol;
      if (cell.method == 2) {
        sol = solve_scenario(problem, train, config.backend);
      } else {
        const RobustSet set = build_xirob(train, config.partition, cell.method == 0 ? config.kappas : box_kappas,
                                          rec.theta, config.epsilon);
        rec.n_dr = set.n_dr;
        sol = solve_drpoly(problem, set, config.backend);
      }
      rec.cost = sol.cost;
      rec.violation_freq = violation_frequency(problem, sol.x, validation).violation_frequency;
      rec.status = to_string(sol.status);
    } catch (const Error& e) {
      rec.status = failure_class(e);
      spdlog::warn("sweep cell {} theta {} repeat {} failed: {}", rec.method, rec.theta, rec.repeat, e.what());
    }
    spdlog::info("sweep {} theta={} repeat={} cost={} viol={} ({})", rec.method, fmt(rec.theta), rec.repeat,
                 fmt(rec.cost), fmt(rec.violation_freq), rec.status);
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
      });
    for (auto& t : pool) t.join();
  }

  SweepResult out;
  out.records = std::move(records);
  out.tables = aggregate(out.records);
  return out;
}

std::vector<ParetoTable> aggregate(const std::vector<SweepRecord>& records) {
  std::vector<ParetoTable> tables;
  for (const char* method : kMethods) {
    std::map<double, std::vector<const SweepRecord*>> by_theta;
    bool seen = false;
    for (const auto& r : records) {
      if (r.method != method) continue;
      seen = true;
      const double key = std::isnan(r.theta) ? -kInf : r.theta;
      auto& bucket = by_theta[key];
      if (r.status == "optimal") bucket.push_back(&r);
    }
    if (!seen) continue;
    ParetoTable table;
    table.method = method;
    for (const auto& [theta, rs] : by_theta) {
      ParetoRow row;
      row.theta = std::isinf(theta) ? kNaN : theta;
      row.n_repeats = static_cast<int>(rs.size());
      if (rs.empty()) {
        row.mean_cost = row.cost_std = row.mean_violation = row.violation_std = kNaN;
      } else {
        const double n = static_cast<double>(rs.size());
        for (const auto* r : rs) {
          row.mean_cost += r->cost / n;
          row.mean_violation += r->violation_freq / n;
        }
        if (rs.size() > 1) {
          for (const auto* r : rs) {
            row.cost_std += std::pow(r->cost - row.mean_cost, 2);
            row.violation_std += std::pow(r->violation_freq - row.mean_violation, 2);
          }
          row.cost_std = std::sqrt(row.cost_std / (n - 1));
          row.violation_std = std::sqrt(row.violation_std / (n - 1));
        }
      }
      table.rows.push_back(row);
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

std::vector<MethodReport> compare_methods(std::vector<MethodReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MethodReport& a, const MethodReport& b) { return a.cost < b.cost; });
  return reports;
}

std::string comparison_csv(const std::vector<MethodReport>& reports) {
  std::ostringstream os;
  os << "method,theta,cost,violation_freq,n_validation\n";
  for (const auto& r : reports)
    os << r.method << "," << fmt(r.theta) << "," << fmt(r.cost) << "," << fmt(r.report.violation_frequency) << ","
       << r.report.n_validation << "\n";
  return os.str();
}

std::string pareto_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << "method,theta,repeat,cost,violation_freq,n_dr,status\n";
  for (const auto& r : records)
    os << r.method << "," << fmt(r.theta) << "," << r.repeat << "," << fmt(r.cost) << "," << fmt(r.violation_freq)
       << "," << r.n_dr << "," << r.status << "\n";
  return os.str();
}

std::string summary_csv(const std::vector<ParetoTable>& tables) {
  std::ostringstream os;
  os << "method,theta,mean_cost,cost_std,mean_violation,violation_std,n_repeats\n";
  for (const auto& t : tables)
    for (const auto& r : t.rows)
      os << t.method << "," << fmt(r.theta) << "," << fmt(r.mean_cost) << "," << fmt(r.cost_std) << ","
         << fmt(r.mean_violation) << "," << fmt(r.violation_std) << "," << r.n_repeats << "\n";
  return os.str();
}

}  // namespace drcc
