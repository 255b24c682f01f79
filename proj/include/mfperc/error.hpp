#pragma once

#include <stdexcept>
#include <string>

namespace mfperc {

enum class ErrorKind {
  invalid_parameter,
  invalid_structure,
  capacity,
  sampling_failure,
  out_of_regime,
  out_of_model,
  disconnected,
  horizon,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// drivers can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::invalid_structure: return "invalid-structure";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::sampling_failure: return "sampling-failure";
    case ErrorKind::out_of_regime: return "out-of-regime";
    case ErrorKind::out_of_model: return "out-of-model";
    case ErrorKind::disconnected: return "disconnected";
    case ErrorKind::horizon: return "horizon";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace mfperc
