#pragma once

#include <stdexcept>
#include <string>

namespace driftlens {

// Error taxonomy shared by the whole library. The C API maps these 1:1 to
// dl_status codes, so keep the set small and stable.
enum class ErrorCode {
  invalid_argument,
  validation,           // content violates a declared invariant (NaN, range, ...)
  size_mismatch,        // dimensions / pairing / alignment errors
  format,               // unrecognized file magic or malformed structure
  unsupported_version,
  corrupt,              // truncated or internally inconsistent stream
  io,
  math_domain,          // operation undefined for these inputs
  coverage,             // required grid cells / upstream artifacts missing
  lookup,
  config,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace driftlens
