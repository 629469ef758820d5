#pragma once

// File formats. Everything the CLI reads or writes goes through here.
//
//   data.csv     header of variable names, one row per time step
//   system json  {"variables": [...], "equations": [{"kind", "output", "terms": [{"var", "lag", "coeff"}]}],
//                 "sources": [...] (optional)}
//   report json  versioned discovery report; +inf condition numbers are "inf"
//   mc json      Monte Carlo configuration
//   table.csv    combination,truth,observed_admissible,type1_pct,type2_pct,failed_runs

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "povdae/montecarlo.hpp"
#include "povdae/pipeline.hpp"
#include "povdae/simulate.hpp"
#include "povdae/sysmodel.hpp"

namespace povdae::io {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

struct Provenance {
  std::uint64_t seed = 0;
  std::vector<double> sigmas;

  bool operator==(const Provenance&) const = default;
};

struct Dataset {
  std::vector<std::string> names;
  Eigen::MatrixXd data;  // M x N_total
  std::optional<Provenance> provenance;

  std::size_t variables() const { return names.size(); }
  std::size_t samples() const { return static_cast<std::size_t>(data.cols()); }
};

Dataset parse_csv(const std::string& text);
Dataset read_csv(const std::filesystem::path& path);
std::string format_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& data);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names, const Eigen::MatrixXd& data);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

struct SystemFile {
  LtiDaeSystem system;
  std::vector<SourceSignalSpec> sources;  // empty when the file has none
};

SystemFile system_from_json(const Json& j);
Json system_to_json(const LtiDaeSystem& system, const std::vector<SourceSignalSpec>& sources = {});
SystemFile read_system(const std::filesystem::path& path);

Json noise_to_json(const NoiseModel& noise);
NoiseModel noise_from_json(const Json& j);

Json report_to_json(const DiscoveryReport& report);
DiscoveryReport report_from_json(const Json& j);
void write_report(const DiscoveryReport& report, const std::filesystem::path& path);
DiscoveryReport read_report(const std::filesystem::path& path);

Json truth_to_json(const LtiDaeSystem& system, const MeasurementSet& measurements, std::size_t burn_in);

// Relative "system_file" entries resolve against `base_dir`.
McConfig mc_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
McConfig read_mc_config(const std::filesystem::path& path);
std::string format_error_table(const ErrorTable& table);

std::string format_oracle_table(const LtiDaeSystem& system, const std::vector<PartitionTruth>& table);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace povdae::io
