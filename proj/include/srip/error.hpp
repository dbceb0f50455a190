#pragma once

#include <stdexcept>
#include <string>

namespace srip {

enum class ErrorKind {
  rank_deficient,
  non_finite,
  bad_length,
  dimension_mismatch,
  bad_parameters,
  rank_collapse,
  parse_error,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::rank_deficient: return "RankDeficient";
    case ErrorKind::non_finite: return "NonFinite";
    case ErrorKind::bad_length: return "BadLength";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::bad_parameters: return "BadParameters";
    case ErrorKind::rank_collapse: return "RankCollapse";
    case ErrorKind::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace srip
