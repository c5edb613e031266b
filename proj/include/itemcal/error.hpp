#pragma once

#include <stdexcept>
#include <string>

namespace itemcal {

enum class ErrorCode {
  Domain,
  Config,
  Io,
  NonConvergence,
  DegenerateData,
  SingularInformation,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; the C API maps `code()` onto
// itemcal_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace itemcal
