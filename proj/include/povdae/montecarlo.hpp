#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "povdae/pipeline.hpp"
#include "povdae/simulate.hpp"
#include "povdae/sysmodel.hpp"

namespace povdae {

struct McConfig {
  LtiDaeSystem system;
  std::vector<SourceSignalSpec> sources;  // defaults to default_sources(system) when empty
  std::vector<double> snr;
  std::size_t n_total = 2047;
  std::size_t burn_in = default_burn_in;
  std::size_t runs = 100;
  std::uint64_t base_seed = 1;
  DiscoveryOptions discovery;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool pipeline_ok = false;
  bool structure_correct = false;
  std::string error;
  std::optional<StructureEstimate> structure;
  std::vector<double> true_sigmas;
  std::vector<double> estimated_sigmas;
  std::vector<bool> admissible;  // per truth combination, lexicographic; empty unless structure_correct
  std::vector<double> conditions;
  IndexSet unambiguous;
  IndexSet ambiguous;

  bool operator==(const RunRecord&) const = default;
};

struct ErrorRow {
  IndexSet dependent;
  std::string label;
  bool truth_admissible = false;
  std::size_t observed_admissible = 0;
  double type1_pct = 0.0;  // only meaningful when !truth_admissible
  double type2_pct = 0.0;  // only meaningful when truth_admissible

  bool operator==(const ErrorRow&) const = default;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;  // lexicographic dependent-set order
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
  std::vector<RunRecord> records;

  bool operator==(const ErrorTable&) const = default;
};

// Seed for run `index`; independent of scheduling.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t index);

RunRecord run_once(const McConfig& config, std::size_t index);

ErrorTable run_montecarlo(const McConfig& config);

}  // namespace povdae
