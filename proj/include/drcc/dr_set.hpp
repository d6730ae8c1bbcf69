#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "drcc/uncertainty.hpp"

namespace drcc {

enum class SlabKind { Axis, Eigen };

/// {xi^i : lo <= normal'xi^i <= hi} for one partition group.
struct Slab {
  std::size_t group = 0;
  Eigen::VectorXd normal;
  double lo = 0.0;
  double hi = 0.0;
  SlabKind kind = SlabKind::Axis;
  std::size_t rank = 0;        // coordinate for Axis, eigen rank (0 = smallest) for Eigen
  double achieved_prob = 0.0;  // worst-case violation probability at [lo, hi]
};

/// Xi_rob = {xi : G xi <= g}, two rows (+normal, -normal) per slab in full
/// xi coordinates.
struct RobustSet {
  std::vector<Slab> slabs;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  std::size_t n_dr = 0;
  double budget = 0.0;
  double theta = 0.0;
  double epsilon = 0.0;
  std::vector<Eigen::Index> excluded_samples;  // training samples outside Xi_rob

  Eigen::Index q() const { return G.rows(); }
  Eigen::Index n_xi() const { return G.cols(); }
  bool contains(const Eigen::VectorXd& xi, double tol = 1e-9) const;
};

/// Axis unit vectors followed by the `kappa` eigenvectors of smallest
/// eigenvalue. Throws KappaOutOfRange unless 0 <= kappa < group size.
std::vector<Eigen::VectorXd> select_normals(const EigBasis& eig, std::size_t group, int kappa);

/// l1 distance from `sample` to {xi : Gamma xi <= rho, normal'xi = b}, or
/// +inf when that set is empty.
double hyperplane_distance(const Eigen::VectorXd& sample, const Eigen::VectorXd& normal, double b,
                           const Eigen::MatrixXd& Gamma, const Eigen::VectorXd& rho);

/// min over lambda >= 0 of lambda*theta + mean(max(0, 1 - lambda*d)), clamped
/// to [0, 1]. Infinite distances contribute nothing.
double worst_case_violation_prob(const Eigen::VectorXd& distances, double theta);

/// Distances used by the slab certificate: 0 for samples outside [lo, hi],
/// otherwise the smaller distance to the two bounding hyperplanes.
Eigen::VectorXd slab_distances(const SampleSet& samples, const PartitionSpec& partition, std::size_t group,
                               const Eigen::VectorXd& normal, double lo, double hi);

/// Recomputes distances from scratch and returns the worst-case probability
/// of leaving the slab.
double slab_violation_prob(const SampleSet& samples, const PartitionSpec& partition, const Slab& slab,
                           double theta);

/// Smallest interval along the shrink path whose worst-case violation
/// probability stays within `budget`. Throws BudgetInfeasible when even the
/// full support range fails.
Slab tighten_slab(const SampleSet& samples, const PartitionSpec& partition, std::size_t group,
                  const Eigen::VectorXd& normal, double theta, double budget);

RobustSet build_xirob(const SampleSet& samples, const PartitionSpec& partition, const std::vector<int>& kappas,
                      double theta, double epsilon);

/// Stacks slab rows into (G, g) for a set whose slabs are already final.
void assemble_rows(RobustSet& set, const PartitionSpec& partition);

nlohmann::json to_json(const RobustSet& set);
RobustSet robust_set_from_json(const nlohmann::json& doc);

}  // namespace drcc
