#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpcaig {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: dimension mismatch, index out of range, bad count.
class InputError : public Error {
public:
  using Error::Error;
};

/// Data that admits no meaningful answer (all points identical, empty graph).
class DegenerateDataError : public Error {
public:
  using Error::Error;
};

/// Invalid run configuration (CLI flags, header line, parameter ranges).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// Structural problem in a delimited text file (ragged rows, missing header).
class FormatError : public Error {
public:
  using Error::Error;
};

/// A cell that is not a finite number. Coordinates are 1-based.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& cell)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) +
              ": cannot parse '" + cell + "' as a finite number"),
        line_(line), column_(column) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace kpcaig
