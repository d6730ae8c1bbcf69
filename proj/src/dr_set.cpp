#include "drcc/dr_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "drcc/errors.hpp"
#include "drcc/lp.hpp"

namespace drcc {
namespace {

constexpr double kShrinkTol = 1e-4;

Eigen::VectorXd group_slice(const SampleSet& samples, const IndexGroup& group, Eigen::Index m) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(group.size()));
  for (std::size_t j = 0; j < group.size(); ++j)
    out[static_cast<Eigen::Index>(j)] = samples.samples(m, static_cast<Eigen::Index>(group[j]));
  return out;
}

const char* kind_name(SlabKind k) { return k == SlabKind::Axis ? "axis" : "eigen"; }

}  // namespace

bool RobustSet::contains(const Eigen::VectorXd& xi, double tol) const {
  if (xi.size() != G.cols()) throw DimensionMismatch("RobustSet::contains: xi length");
  return G.rows() == 0 || ((G * xi - g).array() <= tol).all();
}

std::vector<Eigen::VectorXd> select_normals(const EigBasis& eig, std::size_t group, int kappa) {
  if (group >= eig.groups.size()) throw IndexOutOfRange("eigen basis group " + std::to_string(group));
  const auto& e = eig.groups[group];
  const Eigen::Index k = e.values.size();
  if (kappa < 0 || kappa >= k)
    throw KappaOutOfRange("kappa " + std::to_string(kappa) + " outside [0, " + std::to_string(k - 1) + "] for group " +
                          std::to_string(group));
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index j = 0; j < k; ++j) out.push_back(Eigen::VectorXd::Unit(k, j));
  for (int j = 0; j < kappa; ++j) out.push_back(e.vectors.col(j));
  return out;
}

// Dual form: max y(b - normal'x) + z'(Gamma x - rho) over y free, z >= 0 with
// |normal*y - Gamma'z|_inf <= 1. Unbounded dual means the hyperplane misses the support.
double hyperplane_distance(const Eigen::VectorXd& sample, const Eigen::VectorXd& normal, double b,
                           const Eigen::MatrixXd& Gamma, const Eigen::VectorXd& rho) {
  const Eigen::Index k = sample.size();
  if (normal.size() != k || Gamma.cols() != k || rho.size() != Gamma.rows())
    throw DimensionMismatch("hyperplane_distance: inconsistent dimensions");
  const Eigen::Index r = Gamma.rows();
  LpBuilder lp(1 + r);
  lp.set_bounds(0, -kInf, kInf);
  lp.set_cost(0, -(b - normal.dot(sample)));
  const Eigen::VectorXd slack = Gamma * sample - rho;
  for (Eigen::Index i = 0; i < r; ++i) lp.set_cost(1 + i, -slack[i]);
  for (Eigen::Index j = 0; j < k; ++j) {
    LpBuilder::Terms row{{0, normal[j]}};
    for (Eigen::Index i = 0; i < r; ++i)
      if (Gamma(i, j) != 0.0) row.emplace_back(1 + i, -Gamma(i, j));
    lp.add_le(row, 1.0);
    for (auto& t : row) t.second = -t.second;
    lp.add_le(row, 1.0);
  }
  const LpResult res = solve_lp(lp.build());
  if (res.status == LpStatus::Unbounded) return kInf;
  if (res.status != LpStatus::Optimal) throw SolverFailure("hyperplane_distance: dual LP " + std::string(to_string(res.status)));
  return std::max(0.0, -res.objective);
}

double worst_case_violation_prob(const Eigen::VectorXd& distances, double theta) {
  const Eigen::Index n = distances.size();
  if (n == 0) return 0.0;
  auto f = [&](double lambda) {
    double s = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      const double d = distances[m];
      if (std::isinf(d)) continue;
      s += std::max(0.0, 1.0 - lambda * d);
    }
    return lambda * theta + s / static_cast<double>(n);
  };
  double best = f(0.0);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double d = distances[m];
    if (d > 0.0 && std::isfinite(d)) best = std::min(best, f(1.0 / d));
  }
  return std::clamp(best, 0.0, 1.0);
}

Eigen::VectorXd slab_distances(const SampleSet& samples, const PartitionSpec& partition, std::size_t group,
                               const Eigen::VectorXd& normal, double lo, double hi) {
  const auto& g = partition.groups.at(group);
  const Eigen::VectorXd proj = project_samples(samples, g, normal);
  Eigen::VectorXd d(samples.size());
  for (Eigen::Index m = 0; m < samples.size(); ++m) {
    if (proj[m] < lo || proj[m] > hi) {
      d[m] = 0.0;
      continue;
    }
    const Eigen::VectorXd x = group_slice(samples, g, m);
    d[m] = std::min(hyperplane_distance(x, normal, hi, partition.Gamma[group], partition.rho[group]),
                    hyperplane_distance(x, normal, lo, partition.Gamma[group], partition.rho[group]));
  }
  return d;
}

double slab_violation_prob(const SampleSet& samples, const PartitionSpec& partition, const Slab& slab,
                           double theta) {
  return worst_case_violation_prob(slab_distances(samples, partition, slab.group, slab.normal, slab.lo, slab.hi),
                                   theta);
}

Slab tighten_slab(const SampleSet& samples, const PartitionSpec& partition, std::size_t group,
                  const Eigen::VectorXd& normal, double theta, double budget) {
  if (!(budget > 0.0 && budget < 1.0)) throw ValidationError("budget", "must lie in (0, 1)");
  if (!(theta >= 0.0)) throw ValidationError("theta", "must be nonnegative");
  if (samples.size() < 1) throw TooFewSamples("tighten_slab needs at least one sample");
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw ValidationError("normal", "must have unit length");

  const auto [L, U] = support_range(partition, group, normal);
  const double anchor = project_samples(samples, partition.groups.at(group), normal).mean();
  auto interval = [&, L = L, U = U](double t) {
    return std::pair<double, double>{anchor - t * (anchor - L), anchor + t * (U - anchor)};
  };
  auto prob = [&](double t) {
    const auto [lo, hi] = interval(t);
    return worst_case_violation_prob(slab_distances(samples, partition, group, normal, lo, hi), theta);
  };

  Slab slab;
  slab.group = group;
  slab.normal = normal;
  double p_hi = prob(1.0);
  if (p_hi > budget) {
    throw BudgetInfeasible(group, 0,
                           "group " + std::to_string(group) + ": full support range has worst-case violation " +
                               std::to_string(p_hi) + " above budget " + std::to_string(budget) +
                               " (theta too large for N and epsilon)");
  }
  double t_lo = 0.0, t_hi = 1.0;
  if (U - L > 0.0) {
    while (t_hi - t_lo > kShrinkTol) {
      const double mid = 0.5 * (t_lo + t_hi);
      const double p = prob(mid);
      if (p <= budget) {
        t_hi = mid;
        p_hi = p;
      } else {
        t_lo = mid;
      }
    }
  }
  std::tie(slab.lo, slab.hi) = interval(t_hi);
  slab.achieved_prob = p_hi;
  return slab;
}

void assemble_rows(RobustSet& set, const PartitionSpec& partition) {
  const Eigen::Index n_xi = partition.dim();
  const auto q = static_cast<Eigen::Index>(2 * set.slabs.size());
  set.G = Eigen::MatrixXd::Zero(q, n_xi);
  set.g.resize(q);
  for (std::size_t s = 0; s < set.slabs.size(); ++s) {
    const auto& slab = set.slabs[s];
    const auto& grp = partition.groups.at(slab.group);
    const auto r = static_cast<Eigen::Index>(2 * s);
    for (std::size_t j = 0; j < grp.size(); ++j) {
      const double v = slab.normal[static_cast<Eigen::Index>(j)];
      set.G(r, static_cast<Eigen::Index>(grp[j])) = v;
      set.G(r + 1, static_cast<Eigen::Index>(grp[j])) = -v;
    }
    set.g[r] = slab.hi;
    set.g[r + 1] = -slab.lo;
  }
  set.n_dr = set.slabs.size();
}

RobustSet build_xirob(const SampleSet& samples, const PartitionSpec& partition, const std::vector<int>& kappas,
                      double theta, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon", "must lie in (0, 1)");
  if (!(theta >= 0.0)) throw ValidationError("theta", "must be nonnegative");
  if (kappas.size() != partition.num_groups())
    throw DimensionMismatch("build_xirob: " + std::to_string(kappas.size()) + " kappas for " +
                            std::to_string(partition.num_groups()) + " groups");
  if (samples.dim() != partition.dim()) throw DimensionMismatch("build_xirob: sample width differs from partition");

  RobustSet set;
  set.theta = theta;
  set.epsilon = epsilon;

  std::vector<std::vector<Eigen::VectorXd>> normals(partition.num_groups());
  std::size_t n_dr = 0;
  for (std::size_t i = 0; i < partition.num_groups(); ++i) {
    const auto k = static_cast<int>(partition.groups[i].size());
    if (kappas[i] < 0 || kappas[i] >= k)
      throw KappaOutOfRange("kappa " + std::to_string(kappas[i]) + " outside [0, " + std::to_string(k - 1) +
                            "] for group " + std::to_string(i));
    EigBasis basis;
    if (kappas[i] > 0) {
      basis.groups.push_back(symmetric_eig(empirical_covariance(samples, partition.groups[i])));
    } else {
      basis.groups.push_back({Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Identity(k, k)});
    }
    normals[i] = select_normals(basis, 0, kappas[i]);
    n_dr += normals[i].size();
  }
  set.budget = epsilon / static_cast<double>(n_dr);

  for (std::size_t i = 0; i < partition.num_groups(); ++i) {
    const std::size_t k = partition.groups[i].size();
    for (std::size_t j = 0; j < normals[i].size(); ++j) {
      Slab slab;
      try {
        slab = tighten_slab(samples, partition, i, normals[i][j], theta, set.budget);
      } catch (const BudgetInfeasible& e) {
        throw BudgetInfeasible(i, j, "slab " + std::to_string(j) + " of " + e.what());
      }
      slab.kind = j < k ? SlabKind::Axis : SlabKind::Eigen;
      slab.rank = j < k ? j : j - k;
      set.slabs.push_back(std::move(slab));
    }
  }
  assemble_rows(set, partition);

  for (Eigen::Index m = 0; m < samples.size(); ++m)
    if (!set.contains(samples.sample(m))) set.excluded_samples.push_back(m);
  if (!set.excluded_samples.empty())
    spdlog::info("{} of {} training samples lie outside the robust set", set.excluded_samples.size(), samples.size());
  return set;
}

nlohmann::json to_json(const RobustSet& set) {
  nlohmann::json slabs = nlohmann::json::array();
  for (const auto& s : set.slabs) {
    slabs.push_back({{"group", s.group},
                     {"normal", std::vector<double>(s.normal.data(), s.normal.data() + s.normal.size())},
                     {"lo", s.lo},
                     {"hi", s.hi},
                     {"kind", kind_name(s.kind)},
                     {"rank", s.rank},
                     {"achieved_prob", s.achieved_prob}});
  }
  nlohmann::json G = nlohmann::json::array();
  for (Eigen::Index r = 0; r < set.G.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(set.G.cols()));
    for (Eigen::Index c = 0; c < set.G.cols(); ++c) row[static_cast<std::size_t>(c)] = set.G(r, c);
    G.push_back(row);
  }
  return {{"slabs", slabs},
          {"G", G},
          {"g", std::vector<double>(set.g.data(), set.g.data() + set.g.size())},
          {"n_dr", set.n_dr},
          {"n_xi", set.G.cols()},
          {"budget", set.budget},
          {"theta", set.theta},
          {"epsilon", set.epsilon},
          {"excluded_samples", set.excluded_samples}};
}

RobustSet robust_set_from_json(const nlohmann::json& doc) {
  try {
    RobustSet set;
    for (const auto& s : doc.at("slabs")) {
      Slab slab;
      slab.group = s.at("group").get<std::size_t>();
      const auto n = s.at("normal").get<std::vector<double>>();
      slab.normal = Eigen::Map<const Eigen::VectorXd>(n.data(), static_cast<Eigen::Index>(n.size()));
      slab.lo = s.at("lo").get<double>();
      slab.hi = s.at("hi").get<double>();
      slab.kind = s.at("kind").get<std::string>() == "eigen" ? SlabKind::Eigen : SlabKind::Axis;
      slab.rank = s.value("rank", std::size_t{0});
      slab.achieved_prob = s.value("achieved_prob", 0.0);
      set.slabs.push_back(std::move(slab));
    }
    const auto& G = doc.at("G");
    const auto n_xi = doc.value("n_xi", G.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(G.at(0).size()));
    set.G.resize(static_cast<Eigen::Index>(G.size()), n_xi);
    for (std::size_t r = 0; r < G.size(); ++r) {
      const auto row = G[r].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != n_xi) throw ParseError("robust set: ragged G");
      for (std::size_t c = 0; c < row.size(); ++c)
        set.G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    const auto g = doc.at("g").get<std::vector<double>>();
    if (g.size() != G.size()) throw ParseError("robust set: g length differs from G rows");
    set.g = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    set.n_dr = doc.value("n_dr", set.slabs.size());
    set.budget = doc.value("budget", 0.0);
    set.theta = doc.value("theta", 0.0);
    set.epsilon = doc.value("epsilon", 0.0);
    set.excluded_samples = doc.value("excluded_samples", std::vector<Eigen::Index>{});
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("robust set: ") + e.what());
  }
}

}  // namespace drcc
