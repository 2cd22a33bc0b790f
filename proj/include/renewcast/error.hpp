#pragma once

#include <stdexcept>
#include <string>

namespace renewcast {

// Stable error identifiers. The numeric values are part of the C API
// (see renewcast.h) and must not be reordered.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kMissingColumn = 2,
  kDuplicateTimestamp = 3,
  kEmptyFile = 4,
  kNoOverlap = 5,
  kFrequencyMismatch = 6,
  kAllMissingColumn = 7,
  kAllColumnsDropped = 8,
  kEmptyTrainRange = 9,
  kUnfittedColumn = 10,
  kTargetMissingInTrain = 11,
  kNoTimestamp = 12,
  kStillNonStationary = 13,
  kZeroVarianceTarget = 14,
  kTooFewSamples = 15,
  kSingularDesign = 16,
  kTooShort = 17,
  kDegenerateSeries = 18,
  kLengthMismatch = 19,
  kDimensionMismatch = 20,
  kShapeMismatch = 21,
  kSequenceTooShort = 22,
  kDivergenceDetected = 23,
  kInvalidSpec = 24,
  kNonConvergence = 25,
  kInvalidOrders = 26,
  kAllTrialsDiverged = 27,
  kSplitTooSmall = 28,
  kTooFewFolds = 29,
  kIoError = 30,
  kConfigInvalid = 31,
  kDatasetMissing = 32,
  kParseError = 33,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  // Payload without the code prefix (column name, config field, ...).
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace renewcast
