#include "drcc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "drcc/errors.hpp"
#include "drcc/lp.hpp"

namespace drcc {
namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiSweeps = 100;
constexpr std::size_t kStallWindow = 100000;
constexpr double kMinAcceptance = 1e-4;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<std::string> sample_columns(const NetworkCase& net) {
  std::vector<std::string> cols;
  for (const auto& w : net.wind_units) cols.push_back("w_" + std::to_string(w.bus));
  return cols;
}

Eigen::Index PartitionSpec::dim() const {
  Eigen::Index n = 0;
  for (const auto& g : groups) n += static_cast<Eigen::Index>(g.size());
  return n;
}

PartitionSpec box_partition(const std::vector<IndexGroup>& groups, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  PartitionSpec spec;
  spec.groups = groups;
  for (const auto& g : groups) {
    const auto k = static_cast<Eigen::Index>(g.size());
    // Rows alternate +e_j, -e_j so the box lines up with full-range axis slabs.
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(2 * k, k);
    Eigen::VectorXd rho(2 * k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto w = static_cast<Eigen::Index>(g[static_cast<std::size_t>(j)]);
      if (w >= upper.size() || w >= lower.size()) throw IndexOutOfRange("wind index " + std::to_string(w));
      Gamma(2 * j, j) = 1.0;
      Gamma(2 * j + 1, j) = -1.0;
      rho[2 * j] = upper[w];
      rho[2 * j + 1] = -lower[w];
    }
    spec.Gamma.push_back(std::move(Gamma));
    spec.rho.push_back(std::move(rho));
  }
  return spec;
}

PartitionSpec box_partition(const NetworkCase& net, const std::vector<IndexGroup>& groups) {
  const auto n = static_cast<Eigen::Index>(net.wind_units.size());
  Eigen::VectorXd lo(n), hi(n);
  for (Eigen::Index w = 0; w < n; ++w) {
    lo[w] = net.wind_units[static_cast<std::size_t>(w)].support_lower;
    hi[w] = net.wind_units[static_cast<std::size_t>(w)].support_upper;
  }
  return box_partition(groups, lo, hi);
}

std::vector<IndexGroup> resolve_groups(const NetworkCase& net, const std::vector<std::vector<std::string>>& ids) {
  std::vector<IndexGroup> out;
  for (const auto& group : ids) {
    IndexGroup g;
    for (const auto& id : group) g.push_back(net.wind_index(id));
    out.push_back(std::move(g));
  }
  return out;
}

std::pair<double, double> support_range(const PartitionSpec& spec, std::size_t group,
                                        const Eigen::VectorXd& normal) {
  if (group >= spec.num_groups()) throw IndexOutOfRange("partition group " + std::to_string(group));
  const auto& Gamma = spec.Gamma[group];
  if (normal.size() != Gamma.cols()) throw DimensionMismatch("support_range: normal length");
  LinearProgram lp;
  lp.A = Gamma.sparseView();
  lp.b = spec.rho[group];
  lp.A_eq.resize(0, Gamma.cols());
  lp.b_eq.resize(0);
  lp.lower = Eigen::VectorXd::Constant(Gamma.cols(), -kInf);
  lp.upper = Eigen::VectorXd::Constant(Gamma.cols(), kInf);
  double bounds[2];
  for (int s = 0; s < 2; ++s) {
    lp.objective = s == 0 ? normal : Eigen::VectorXd(-normal);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal)
      throw SolverFailure("support of group " + std::to_string(group) + " is " + to_string(r.status));
    bounds[s] = s == 0 ? r.objective : -r.objective;
  }
  return {bounds[0], bounds[1]};
}

void validate_partition(const PartitionSpec& spec, Eigen::Index n_xi) {
  if (spec.Gamma.size() != spec.groups.size() || spec.rho.size() != spec.groups.size())
    throw ValidationError("partition", "support blocks do not match the group count");
  std::vector<int> seen(static_cast<std::size_t>(n_xi), 0);
  for (std::size_t i = 0; i < spec.groups.size(); ++i) {
    const auto& g = spec.groups[i];
    const std::string path = "partition.groups[" + std::to_string(i) + "]";
    if (g.empty()) throw ValidationError(path, "empty group");
    for (auto w : g) {
      if (static_cast<Eigen::Index>(w) >= n_xi) throw ValidationError(path, "wind index out of range");
      if (seen[w]++) throw ValidationError(path, "wind index " + std::to_string(w) + " appears twice");
    }
    if (spec.Gamma[i].cols() != static_cast<Eigen::Index>(g.size()) || spec.rho[i].size() != spec.Gamma[i].rows())
      throw ValidationError(path, "support dimensions do not match the group");
    for (Eigen::Index j = 0; j < spec.Gamma[i].cols(); ++j) {
      try {
        support_range(spec, i, Eigen::VectorXd::Unit(spec.Gamma[i].cols(), j));
      } catch (const SolverFailure& e) {
        throw ValidationError(path, std::string("support is empty or unbounded: ") + e.what());
      }
    }
  }
  for (Eigen::Index w = 0; w < n_xi; ++w)
    if (!seen[static_cast<std::size_t>(w)])
      throw ValidationError("partition.groups", "wind index " + std::to_string(w) + " is not covered");
}

void check_support(const SampleSet& samples, const PartitionSpec& spec) {
  std::vector<Eigen::Index> bad;
  for (Eigen::Index m = 0; m < samples.size(); ++m) {
    for (std::size_t i = 0; i < spec.num_groups(); ++i) {
      const auto& g = spec.groups[i];
      Eigen::VectorXd sub(static_cast<Eigen::Index>(g.size()));
      for (std::size_t j = 0; j < g.size(); ++j)
        sub[static_cast<Eigen::Index>(j)] = samples.samples(m, static_cast<Eigen::Index>(g[j]));
      if (((spec.Gamma[i] * sub - spec.rho[i]).array() > 1e-9).any()) {
        bad.push_back(m);
        break;
      }
    }
  }
  if (bad.empty()) return;
  std::string list;
  for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 20); ++i)
    list += (i ? "," : "") + std::to_string(bad[i]);
  if (bad.size() > 20) list += ",...";
  throw ValidationError("samples", std::to_string(bad.size()) + " sample(s) outside the support: [" + list + "]");
}

Eigen::MatrixXd empirical_covariance(const SampleSet& samples, const IndexGroup& group) {
  if (samples.size() < 2) throw TooFewSamples("covariance needs at least 2 samples, got " + std::to_string(samples.size()));
  const auto k = static_cast<Eigen::Index>(group.size());
  Eigen::MatrixXd X(samples.size(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto w = static_cast<Eigen::Index>(group[static_cast<std::size_t>(j)]);
    if (w >= samples.dim()) throw IndexOutOfRange("wind index " + std::to_string(w));
    X.col(j) = samples.samples.col(w);
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(samples.size());
  return (cov + cov.transpose()) / 2.0;
}

SymmetricEig symmetric_eig(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("symmetric_eig: matrix is not square");
  const Eigen::Index n = m.rows();
  if (n > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw NotSymmetric("symmetric_eig: asymmetric input");

  Eigen::MatrixXd a = (m + m.transpose()) / 2.0;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, a.norm());
  auto off = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  int sweep = 0;
  for (; sweep < kJacobiSweeps && off() > kJacobiTol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off() > kJacobiTol * scale * 1e3)
    throw NumericalFailure("symmetric_eig: Jacobi did not converge in " + std::to_string(kJacobiSweeps) + " sweeps");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SymmetricEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.values[j] = a(src, src);
    Eigen::VectorXd col = v.col(src).normalized();
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    if (col[big] < 0) col = -col;
    out.vectors.col(j) = col;
  }
  return out;
}

EigBasis eig_basis(const SampleSet& samples, const PartitionSpec& partition) {
  EigBasis basis;
  for (const auto& g : partition.groups) basis.groups.push_back(symmetric_eig(empirical_covariance(samples, g)));
  return basis;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

SampleSet generate_samples(const GeneratorConfig& config, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Index dim = config.mean.size();
  if (config.lower.size() != dim || config.upper.size() != dim)
    throw DimensionMismatch("generator: truncation box length differs from the mean");
  if (config.covariance.size() != config.groups.size())
    throw DimensionMismatch("generator: one covariance block per group is required");
  for (Eigen::Index w = 0; w < dim; ++w)
    if (!(config.lower[w] <= config.upper[w]))
      throw ValidationError("generator.truncation[" + std::to_string(w) + "]", "empty interval");
  if (n < 0) throw ValidationError("n", "negative sample count");

  std::vector<Eigen::MatrixXd> factor;
  std::vector<int> covered(static_cast<std::size_t>(dim), 0);
  for (std::size_t i = 0; i < config.groups.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(config.groups[i].size());
    if (config.covariance[i].rows() != k || config.covariance[i].cols() != k)
      throw DimensionMismatch("generator: covariance block " + std::to_string(i) + " has the wrong size");
    for (auto w : config.groups[i]) {
      if (static_cast<Eigen::Index>(w) >= dim || covered[w]++)
        throw ValidationError("generator.groups[" + std::to_string(i) + "]", "invalid or repeated index");
    }
    const SymmetricEig eig = symmetric_eig(config.covariance[i]);
    if (eig.values.size() > 0 && eig.values.minCoeff() < -1e-9)
      throw ValidationError("generator.covariance[" + std::to_string(i) + "]", "not positive semidefinite");
    factor.push_back(eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  }
  for (Eigen::Index w = 0; w < dim; ++w)
    if (!covered[static_cast<std::size_t>(w)])
      throw ValidationError("generator.groups", "wind index " + std::to_string(w) + " is not covered");

  SampleSet out;
  out.columns = config.columns;
  out.samples.resize(n, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> attempts(config.groups.size(), 0), accepted(config.groups.size(), 0);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < config.groups.size(); ++i) {
      const auto& g = config.groups[i];
      const auto k = static_cast<Eigen::Index>(g.size());
      Eigen::VectorXd z(k), draw(k);
      while (true) {
        for (Eigen::Index j = 0; j < k; ++j) z[j] = normal(rng);
        draw = factor[i] * z;
        bool inside = true;
        for (Eigen::Index j = 0; j < k; ++j) {
          const auto w = static_cast<Eigen::Index>(g[static_cast<std::size_t>(j)]);
          draw[j] += config.mean[w];
          if (draw[j] < config.lower[w] || draw[j] > config.upper[w]) inside = false;
        }
        if (inside) ++accepted[i];
        if (++attempts[i] == kStallWindow) {
          if (static_cast<double>(accepted[i]) < kMinAcceptance * kStallWindow)
            throw RejectionStall("generator: acceptance below 1e-4 for group " + std::to_string(i));
          attempts[i] = accepted[i] = 0;
        }
        if (inside) break;
      }
      for (Eigen::Index j = 0; j < k; ++j) out.samples(m, static_cast<Eigen::Index>(g[static_cast<std::size_t>(j)])) = draw[j];
    }
  }
  return out;
}

Eigen::VectorXd project_samples(const SampleSet& samples, const IndexGroup& group, const Eigen::VectorXd& normal) {
  if (normal.size() != static_cast<Eigen::Index>(group.size()))
    throw DimensionMismatch("project_samples: normal has length " + std::to_string(normal.size()) + ", group has " +
                            std::to_string(group.size()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(samples.size());
  for (std::size_t j = 0; j < group.size(); ++j) {
    const auto w = static_cast<Eigen::Index>(group[j]);
    if (w >= samples.dim()) throw IndexOutOfRange("wind index " + std::to_string(w));
    out += normal[static_cast<Eigen::Index>(j)] * samples.samples.col(w);
  }
  return out;
}

void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples,
                       const std::vector<std::string>& comments) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  for (const auto& c : comments) os << "# " << c << "\n";
  for (std::size_t j = 0; j < samples.columns.size(); ++j) os << (j ? "," : "") << samples.columns[j];
  os << "\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index m = 0; m < samples.size(); ++m) {
    for (Eigen::Index j = 0; j < samples.dim(); ++j) os << (j ? "," : "") << samples.samples(m, j);
    os << "\n";
  }
}

SampleSet read_samples_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path.string());
  SampleSet out;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (!header) {
      out.columns = cells;
      header = true;
      continue;
    }
    if (cells.size() != out.columns.size())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(out.columns.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || !std::isfinite(v))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ParseError(path.string() + ": missing header row");
  out.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.columns.size()));
  for (std::size_t m = 0; m < rows.size(); ++m)
    for (std::size_t j = 0; j < rows[m].size(); ++j)
      out.samples(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = rows[m][j];
  return out;
}

}  // namespace drcc
