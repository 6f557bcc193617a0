#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tms {

enum class ErrorKind {
  EmptyStratum,
  ZeroPropensity,
  ZeroOverlapDenominator,
  DegenerateInstrument,
  DegenerateTreatment,
  EmptyArm,
  EmptyProxyGroup,
  MissingBaseline,
  TooFewRecords,
  ReplicateExhausted,
  MissingColumn,
  InvalidInput,
  RunFailures,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyStratum: return "EmptyStratum";
    case ErrorKind::ZeroPropensity: return "ZeroPropensity";
    case ErrorKind::ZeroOverlapDenominator: return "ZeroOverlapDenominator";
    case ErrorKind::DegenerateInstrument: return "DegenerateInstrument";
    case ErrorKind::DegenerateTreatment: return "DegenerateTreatment";
    case ErrorKind::EmptyArm: return "EmptyArm";
    case ErrorKind::EmptyProxyGroup: return "EmptyProxyGroup";
    case ErrorKind::MissingBaseline: return "MissingBaseline";
    case ErrorKind::TooFewRecords: return "TooFewRecords";
    case ErrorKind::ReplicateExhausted: return "ReplicateExhausted";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::RunFailures: return "RunFailures";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Raised by estimators, resamplers and the experiment harness. The kind is
/// machine-readable so callers (bootstrap redraws, failure reports) can react
/// without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tms
