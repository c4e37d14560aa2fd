#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tabeval {

enum class ErrorCode {
  InvalidArgument,
  // dataio
  MissingColumn,
  UnexpectedColumn,
  ParseFailure,
  BadLabel,
  BadSchema,
  DegenerateSplit,
  SchemaMismatch,
  // numstats
  TooFewSamples,
  NotSymmetric,
  IndefiniteMatrix,
  DimensionMismatch,
  EmptySample,
  LengthMismatch,
  // models
  NonFiniteLoss,
  EmptyInput,
  RankTooLow,
  SingleClass,
  EmptyData,
  // metrics
  EmptyDataset,
  EmptyTestSet,
  // perturb
  ResultEmpty,
  NoCategoricalColumns,
  MissingClass,
  // harness
  NonFinite,
  IoFailure,
  DatasetLoadFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tabeval
