#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedGeometryError : public Error {
public:
  using Error::Error;
};

class DegenerateMeshError : public Error {
public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number where parsing stopped.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class UnsupportedElementError : public Error {
public:
  using Error::Error;
};

class InvertedElementError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (e.g. damage outside [0,1]).
class DomainError : public Error {
public:
  using Error::Error;
};

class SizeError : public Error {
public:
  using Error::Error;
};

/// Bad or missing configuration entry. `key()` names the offending key when known.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

class SolverError : public Error {
public:
  SolverError(const std::string& what, std::vector<double> residual_history = {})
      : Error(what), history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

class NumericalFailureError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace pff
