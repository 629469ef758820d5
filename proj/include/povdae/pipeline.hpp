#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "povdae/dipca.hpp"
#include "povdae/partition.hpp"
#include "povdae/structure.hpp"

namespace povdae {

struct DiscoveryOptions {
  std::size_t max_lag = 5;
  std::optional<std::size_t> lag2;
  double threshold = default_threshold;
  double unity_ceiling = default_unity_ceiling;
  bool center = true;
  std::optional<std::size_t> constraints;  // fixes d for noise estimation
  std::uint64_t combination_cap = default_combination_cap;
  // When false a run with no admissible partition still returns a report
  // (empty source sets plus a warning) instead of throwing.
  bool require_admissible = true;

  bool operator==(const DiscoveryOptions&) const = default;
};

struct DiscoveryReport {
  std::vector<std::string> names;
  NoiseModel noise;
  StructureEstimate structure;
  std::map<std::size_t, std::vector<double>> spectra;  // scaled singular values per lag
  std::vector<PartitionResult> partitions;
  SourceReport sources;
  DiscoveryOptions options;
  std::vector<std::string> warnings;

  bool operator==(const DiscoveryReport&) const = default;
};

// measurements: M x N_total. Errors carry the failing stage in Error::stage().
DiscoveryReport discover(const Eigen::MatrixXd& measurements, const std::vector<std::string>& names,
                         const DiscoveryOptions& options = {});

// Throws if a report breaks the free-set / disjointness invariants.
void check_report_invariants(const DiscoveryReport& report);

}  // namespace povdae
