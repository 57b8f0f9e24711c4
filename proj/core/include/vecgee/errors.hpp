#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vecgee {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind { configuration, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what)
      : Error(ErrorKind::configuration, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// Non-finite linear predictor, mean outside a variance family's domain.
class DomainError : public NumericalError {
  using NumericalError::NumericalError;
};

class DegenerateVarianceError : public NumericalError {
  using NumericalError::NumericalError;
};

class InsufficientDataError : public NumericalError {
  using NumericalError::NumericalError;
};

/// Scoring or bread matrix is singular. `slots` lists the global coefficient
/// slots found to be linearly dependent on the others.
class RankDeficiencyError : public NumericalError {
 public:
  RankDeficiencyError(const std::string& what, std::vector<std::size_t> slots)
      : NumericalError(what), slots_(std::move(slots)) {}
  const std::vector<std::size_t>& slots() const noexcept { return slots_; }

 private:
  std::vector<std::size_t> slots_;
};

class ContrastError : public ConfigurationError {
  using ConfigurationError::ConfigurationError;
};

/// Malformed or inconsistent input tables (CSV rows, missing W entries).
class IngestionError : public ConfigurationError {
  using ConfigurationError::ConfigurationError;
};

}  // namespace vecgee
