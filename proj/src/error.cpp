#include "wcrisk/error.hpp"

namespace wcrisk {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::not_contractive: return "not_contractive";
    case ErrorKind::infeasible_alpha: return "infeasible_alpha";
    case ErrorKind::infeasible_radius: return "infeasible_radius";
    case ErrorKind::wrong_kind: return "wrong_kind";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace wcrisk
