#pragma once

#include <stdexcept>
#include <string>

namespace ensinfo {

enum class ErrorKind {
  parse,
  ragged_trial,
  non_finite,
  io,
  format,
  dimension_overflow,
  unknown_channel,
  too_short,
  invalid_lag,
  insufficient_points,
  duplicate_points,
  invalid_spec,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure surfaced by the library carries a kind so callers (and
// tests) can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ensinfo
