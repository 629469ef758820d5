#pragma once

// Partition of variables.
//
// For every candidate dependent set of size n_a + n_d, the square submatrix of
// the instantaneous constraint coefficients must be nonsingular for the
// remaining variables to be free. With noisy data rank is replaced by a
// condition-number threshold.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "povdae/combinatorics.hpp"
#include "povdae/dipca.hpp"

namespace povdae {

inline constexpr double default_threshold = 10.0;
inline constexpr std::uint64_t default_combination_cap = 1'000'000;

struct PartitionResult {
  IndexSet dependent;
  double condition = 0.0;  // may be +inf
  bool admissible = false;
  IndexSet free;

  bool operator==(const PartitionResult&) const = default;
};

struct SourceReport {
  IndexSet unambiguous;
  IndexSet ambiguous;
  std::vector<PartitionResult> admissible;
  double threshold = default_threshold;

  bool operator==(const SourceReport&) const = default;
};

// sigma_max / sigma_min; +inf when sigma_min < 1e-300.
double condition_number(const Eigen::MatrixXd& square);

// Orthonormal n_dep x M basis of the dominant row space of the instantaneous
// block (first `variables` columns) of `rows`.
Eigen::MatrixXd instantaneous_basis(const Eigen::MatrixXd& rows, std::size_t variables, std::size_t n_dep);

// Scores every dependent set; result sorted by descending condition number,
// ties broken by the dependent set's lexicographic order.
std::vector<PartitionResult> enumerate_partitions(const Eigen::MatrixXd& rows, std::size_t variables,
                                                  std::size_t n_dep, double threshold = default_threshold,
                                                  std::uint64_t cap = default_combination_cap);

std::vector<PartitionResult> enumerate_partitions(const ConstraintBasis& basis, std::size_t n_dep,
                                                  double threshold = default_threshold,
                                                  std::uint64_t cap = default_combination_cap);

// Throws no_admissible_partition when nothing passes the threshold.
SourceReport classify_sources(const std::vector<PartitionResult>& partitions, double threshold = default_threshold);

// Same classification without the error; empty sets when nothing is admissible.
SourceReport collect_sources(const std::vector<PartitionResult>& partitions, double threshold = default_threshold);

}  // namespace povdae
