#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rod {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error { using Error::Error; };
class NoConvergence : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class DegreeError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class ConnectivityError : public Error { using Error::Error; };
class BudgetError : public Error { using Error::Error; };
class CapExceeded : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

// Warnings go to stderr unless silenced; the counter lets tests observe them.
void warn(std::string_view message);
std::size_t warning_count();
void set_warnings_enabled(bool enabled);

}  // namespace rod
