#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace jointvip {

// Every failure the toolkit reports carries one of these codes. The string
// form (to_string) is the stable, machine-readable name used in error JSON.
enum class ErrorCode {
  // ingest
  MalformedCsv,
  MissingColumn,
  NonNumericCell,
  MissingValue,
  NonBinaryTreatment,
  NonPositiveWeight,
  InvalidRoles,
  InvalidTransform,
  NegativeInputForLog,
  InvalidManifest,
  TreatedInPilot,
  NoTreatedInAnalysis,
  NoControlInAnalysis,
  ZeroPilotVariance,
  // measures
  TooFewValues,
  ZeroVariance,
  UnknownCovariate,
  InvalidOptions,
  // post
  CovariateMissingInPost,
  // render
  InvalidRange,
  // plumbing
  IoError,
  Internal,
};

std::string_view to_string(ErrorCode code);

// True for codes that describe bad input data (CLI exit code 2, HTTP 400).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  // {"code": ..., "message": ..., "detail": {...}}; detail omitted when empty.
  nlohmann::json to_json() const;

private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace jointvip
