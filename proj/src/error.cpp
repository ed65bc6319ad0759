#include "limbswap/error.hpp"

namespace limbswap {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::Range: return "RangeError";
    case ErrorCode::Degenerate: return "DegenerateError";
    case ErrorCode::Order: return "OrderError";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::Invariant: return "InvariantError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::UnknownProsthesis: return "UnknownProsthesis";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "IoError";
  }
  return "Error";
}

}  // namespace limbswap
