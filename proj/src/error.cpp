#include "renewcast/error.hpp"

namespace renewcast {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kDuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kFrequencyMismatch: return "FrequencyMismatch";
    case ErrorCode::kAllMissingColumn: return "AllMissingColumn";
    case ErrorCode::kAllColumnsDropped: return "AllColumnsDropped";
    case ErrorCode::kEmptyTrainRange: return "EmptyTrainRange";
    case ErrorCode::kUnfittedColumn: return "UnfittedColumn";
    case ErrorCode::kTargetMissingInTrain: return "TargetMissingInTrain";
    case ErrorCode::kNoTimestamp: return "NoTimestamp";
    case ErrorCode::kStillNonStationary: return "StillNonStationary";
    case ErrorCode::kZeroVarianceTarget: return "ZeroVarianceTarget";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSingularDesign: return "SingularDesign";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kDegenerateSeries: return "DegenerateSeries";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kSequenceTooShort: return "SequenceTooShort";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kInvalidOrders: return "InvalidOrders";
    case ErrorCode::kAllTrialsDiverged: return "AllTrialsDiverged";
    case ErrorCode::kSplitTooSmall: return "SplitTooSmall";
    case ErrorCode::kTooFewFolds: return "TooFewFolds";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kDatasetMissing: return "DatasetMissing";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace renewcast
