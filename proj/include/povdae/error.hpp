#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace povdae {

enum class ErrorCode {
  malformed_system,
  unsupported_system,
  configuration,
  cannot_set_snr,
  data_too_short,
  not_identifiable,
  inconsistent_counts,
  no_free_variables,
  shape,
  structural_mismatch,
  too_many_combinations,
  no_admissible_partition,
  parse,
  schema_version,
  io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `stage()` is filled in by the
// discovery pipeline so callers can tell which step failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

 private:
  ErrorCode code_;
  std::string detail_;
  std::string stage_;
};

}  // namespace povdae
