#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace routecast {

// Base class for all library failures so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed map, table, or config text. Carries the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(const std::string& origin, std::size_t line, const std::string& what)
      : Error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised by SimWorld::traverse when the requested move would drain the
// battery to or below zero. The traversal does not happen.
class BatteryExhaustedError : public Error {
 public:
  explicit BatteryExhaustedError(double soc)
      : Error("battery exhausted (soc " + std::to_string(soc) + ")"), soc_(soc) {}

  double soc() const { return soc_; }

 private:
  double soc_;
};

// No directed path between the requested endpoints.
class NoPathError : public Error {
 public:
  using Error::Error;
};

}  // namespace routecast
