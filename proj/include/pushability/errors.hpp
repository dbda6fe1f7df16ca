#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pushability {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input (files, JSON, command lines). The CLI maps these to exit code 2.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// PLY parse failure carrying the 1-based line number it was detected on.
class PlyParseError : public ParseError {
 public:
  PlyParseError(std::size_t line, const std::string& detail, const std::string& source = {})
      : ParseError((source.empty() ? std::string() : source + ": ") + "line " + std::to_string(line) + ": " + detail),
        line_(line),
        detail_(detail) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// A well-formed request whose inputs violate a domain precondition (exit code 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Quadric fit impossible: too few points or a rank-deficient design matrix.
class DegenerateShapeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// No ground points with valid normals under an obstacle's scaled footprint.
class EmptyPatchError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace pushability
