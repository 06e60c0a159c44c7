#include "ctfdct/error.hpp"

namespace ctfdct {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Bounds: return "bounds";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::Contract: return "contract";
    case ErrorCode::NoSignal: return "no-signal";
    case ErrorCode::Spec: return "spec";
    case ErrorCode::DegenerateData: return "degenerate-data";
    case ErrorCode::Data: return "data";
    case ErrorCode::Label: return "label";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

}  // namespace ctfdct
