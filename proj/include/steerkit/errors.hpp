#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steerkit {

enum class ErrorKind {
  InvalidParams,
  NonConvergence,
  OffResonance,
  AsymmetricDamping,
  GainNotPositive,
  DegenerateVariance,
  ZeroVariance,
  IntegratorFailure,
  InsufficientTrajectories,
  MissingModes,
  NoThreshold,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::OffResonance: return "OffResonance";
    case ErrorKind::AsymmetricDamping: return "AsymmetricDamping";
    case ErrorKind::GainNotPositive: return "GainNotPositive";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::IntegratorFailure: return "IntegratorFailure";
    case ErrorKind::InsufficientTrajectories: return "InsufficientTrajectories";
    case ErrorKind::MissingModes: return "MissingModes";
    case ErrorKind::NoThreshold: return "NoThreshold";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace steerkit
