#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polyising {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PUBO text. `line()` is 1-based; 0 means "whole document".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a continuous solver's amplitudes blow up (usually too large a
/// learning rate).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyising
