#include "tlsgate/error.hpp"

namespace tlsgate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kNormalization: return "normalization";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kReplay: return "replay";
    case ErrorCode::kState: return "state";
    case ErrorCode::kSchemaVersion: return "schema_version";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kTransport: return "transport";
  }
  return "unknown";
}

}  // namespace tlsgate
