#include "jointvip/error.hpp"

namespace jointvip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::NonBinaryTreatment: return "NonBinaryTreatment";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::InvalidRoles: return "InvalidRoles";
    case ErrorCode::InvalidTransform: return "InvalidTransform";
    case ErrorCode::NegativeInputForLog: return "NegativeInputForLog";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::TreatedInPilot: return "TreatedInPilot";
    case ErrorCode::NoTreatedInAnalysis: return "NoTreatedInAnalysis";
    case ErrorCode::NoControlInAnalysis: return "NoControlInAnalysis";
    case ErrorCode::ZeroPilotVariance: return "ZeroPilotVariance";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::UnknownCovariate: return "UnknownCovariate";
    case ErrorCode::InvalidOptions: return "InvalidOptions";
    case ErrorCode::CovariateMissingInPost: return "CovariateMissingInPost";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

bool is_validation_error(ErrorCode code) {
  return code != ErrorCode::IoError && code != ErrorCode::Internal;
}

nlohmann::json Error::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  out["code"] = std::string(to_string(code_));
  out["message"] = what();
  if (!detail_.is_null() && !detail_.empty()) out["detail"] = detail_;
  return out;
}

}  // namespace jointvip
