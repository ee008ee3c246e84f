#include "ensinfo/error.hpp"

namespace ensinfo {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::ragged_trial: return "ragged trial";
    case ErrorKind::non_finite: return "non-finite sample";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::format: return "format error";
    case ErrorKind::dimension_overflow: return "dimension overflow";
    case ErrorKind::unknown_channel: return "unknown channel";
    case ErrorKind::too_short: return "series too short";
    case ErrorKind::invalid_lag: return "invalid lag";
    case ErrorKind::insufficient_points: return "insufficient points";
    case ErrorKind::duplicate_points: return "duplicate points";
    case ErrorKind::invalid_spec: return "invalid specification";
    case ErrorKind::config: return "configuration error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace ensinfo
