#include "tabeval/error.hpp"

namespace tabeval {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnexpectedColumn: return "UnexpectedColumn";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::BadSchema: return "BadSchema";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RankTooLow: return "RankTooLow";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::ResultEmpty: return "ResultEmpty";
    case ErrorCode::NoCategoricalColumns: return "NoCategoricalColumns";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DatasetLoadFailure: return "DatasetLoadFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace tabeval
