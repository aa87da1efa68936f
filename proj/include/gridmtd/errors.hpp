#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridmtd {

/// Bad input: malformed files, invariant violations, out-of-range arguments.
/// The CLI maps this family to exit code 2.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A case file section is missing or not shaped like a matrix.
class StructureError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
  public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

}  // namespace gridmtd
