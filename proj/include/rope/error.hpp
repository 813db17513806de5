#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rope {

enum class ErrorKind {
  InvalidInput,
  Index,
  InternalState,
  InsufficientWarmup,
  InvalidFrame,
  Divergence,
  InsufficientData,
  EmptyOverlap,
  Config,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Index: return "index";
    case ErrorKind::InternalState: return "internal-state";
    case ErrorKind::InsufficientWarmup: return "insufficient-warmup";
    case ErrorKind::InvalidFrame: return "invalid-frame";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::EmptyOverlap: return "empty-overlap";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rope
