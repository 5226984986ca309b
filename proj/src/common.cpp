#include "gbnns/common.hpp"

namespace gbnns {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::InconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::NotUnitNorm: return "NotUnitNorm";
    case ErrorCode::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::DegenerateDistance: return "DegenerateDistance";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DatasetMismatch: return "DatasetMismatch";
  }
  return "Unknown";
}

}  // namespace gbnns
