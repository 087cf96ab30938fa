#include "hubspoke/error.hpp"

namespace hubspoke {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hubspoke
