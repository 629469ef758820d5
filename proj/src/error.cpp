#include "povdae/error.hpp"

namespace povdae {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_system: return "malformed-system";
    case ErrorCode::unsupported_system: return "unsupported-system";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::cannot_set_snr: return "cannot-set-snr";
    case ErrorCode::data_too_short: return "data-too-short";
    case ErrorCode::not_identifiable: return "not-identifiable";
    case ErrorCode::inconsistent_counts: return "inconsistent-counts";
    case ErrorCode::no_free_variables: return "no-free-variables";
    case ErrorCode::shape: return "shape";
    case ErrorCode::structural_mismatch: return "structural-mismatch";
    case ErrorCode::too_many_combinations: return "too-many-combinations";
    case ErrorCode::no_admissible_partition: return "no-admissible-partition";
    case ErrorCode::parse: return "parse";
    case ErrorCode::schema_version: return "schema-version";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {
std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += std::string(to_string(code)) + ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      detail_(message),
      stage_(std::move(stage)) {}

}  // namespace povdae
