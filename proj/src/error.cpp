#include "artss/error.hpp"

namespace artss {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kEstimation: return "estimation";
    case ErrorKind::kThreshold: return "threshold";
    case ErrorKind::kRefinement: return "refinement";
    case ErrorKind::kPairing: return "pairing";
    case ErrorKind::kAmbiguity: return "ambiguity";
    case ErrorKind::kPooling: return "pooling";
    case ErrorKind::kConditioning: return "conditioning";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace artss
