#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drcc/network.hpp"

namespace drcc {

/// N draws of the wind vector, one row per sample [MW]. Column order follows
/// the wind units of the case.
struct SampleSet {
  std::vector<std::string> columns;  // `w_<bus>`
  Eigen::MatrixXd samples;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }
  Eigen::VectorXd sample(Eigen::Index m) const { return samples.row(m).transpose(); }
};

std::vector<std::string> sample_columns(const NetworkCase& net);

using IndexGroup = std::vector<std::size_t>;

/// Disjoint groups of wind indices with a support polyhedron {Gamma xi <= rho}
/// per group (in group-local coordinates).
struct PartitionSpec {
  std::vector<IndexGroup> groups;
  std::vector<Eigen::MatrixXd> Gamma;
  std::vector<Eigen::VectorXd> rho;

  std::size_t num_groups() const { return groups.size(); }
  Eigen::Index dim() const;
};

/// Box supports taken from the wind units' truncation bounds.
PartitionSpec box_partition(const NetworkCase& net, const std::vector<IndexGroup>& groups);
PartitionSpec box_partition(const std::vector<IndexGroup>& groups, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);

/// Groups given by wind unit ids.
std::vector<IndexGroup> resolve_groups(const NetworkCase& net, const std::vector<std::vector<std::string>>& ids);

/// Checks disjoint cover of 0..n_xi-1 and that every support is nonempty and
/// bounded (one LP per coordinate and direction). Throws ValidationError.
void validate_partition(const PartitionSpec& spec, Eigen::Index n_xi);

/// [min, max] of normal'xi over the support of `group`; throws SolverFailure
/// when the support is empty or unbounded in that direction.
std::pair<double, double> support_range(const PartitionSpec& spec, std::size_t group,
                                        const Eigen::VectorXd& normal);

/// Throws ValidationError listing (up to 20) offending sample indices.
void check_support(const SampleSet& samples, const PartitionSpec& spec);

/// Denominator N. Throws TooFewSamples when N < 2.
Eigen::MatrixXd empirical_covariance(const SampleSet& samples, const IndexGroup& group);

struct SymmetricEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column j pairs with values[j]
};

/// Cyclic Jacobi. Throws NotSymmetric when asymmetry exceeds 1e-9.
SymmetricEig symmetric_eig(const Eigen::MatrixXd& m);

struct EigBasis {
  std::vector<SymmetricEig> groups;
};

EigBasis eig_basis(const SampleSet& samples, const PartitionSpec& partition);

/// Per-group correlated normal draws, rejected outside [lower, upper].
struct GeneratorConfig {
  Eigen::VectorXd mean;
  std::vector<IndexGroup> groups;
  std::vector<Eigen::MatrixXd> covariance;  // parent-normal covariance per group
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::string> columns;
};

/// Deterministic for a fixed seed. Throws RejectionStall when acceptance stays
/// below 1e-4 over a window of draws.
SampleSet generate_samples(const GeneratorConfig& config, Eigen::Index n, std::uint64_t seed);

/// Independent stream seed for (base, index), mixed through std::seed_seq.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// normal'xi^i for every sample, where xi^i is the `group` sub-vector.
Eigen::VectorXd project_samples(const SampleSet& samples, const IndexGroup& group, const Eigen::VectorXd& normal);

/// Header row of column names, one sample per line. Lines starting with '#'
/// are comments.
void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples,
                       const std::vector<std::string>& comments = {});
SampleSet read_samples_csv(const std::filesystem::path& path);

}  // namespace drcc
