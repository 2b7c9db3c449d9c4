#pragma once

#include <stdexcept>
#include <string>

namespace decide {

/// Invalid input: a field violates its domain. Maps to CLI exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  InvalidInput(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)),
        message_(what) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

/// A numerical procedure failed (non-convergence, unresolvable grid, bad fit).
/// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File or stream failure. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw InvalidInput(field, what);
}
}  // namespace detail

}  // namespace decide
