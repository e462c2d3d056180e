#pragma once

#include <stdexcept>
#include <string>

namespace mrg {

/// Machine-readable category carried by every library error. The CLI maps
/// these onto process exit codes.
enum class ErrorCode {
  kDimension,
  kDomain,
  kNumerical,
  kRank,
  kData,
  kEstimation,
  kArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error(ErrorCode::kDimension, m) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorCode::kDomain, m) {}
};

/// Non-finite state or a fixed-point iteration that did not converge.
/// `index` is the time index (filter) or iteration count (solvers), -1 if n/a.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& m, long index = -1, double residual = 0.0)
      : Error(ErrorCode::kNumerical, m), index_(index), residual_(residual) {}

  long index() const noexcept { return index_; }
  double residual() const noexcept { return residual_; }

 private:
  long index_;
  double residual_;
};

class RankError : public Error {
 public:
  explicit RankError(const std::string& m) : Error(ErrorCode::kRank, m) {}
};

/// Bad input data. `row` is 1-based when the error comes from a file, else 0.
class DataError : public Error {
 public:
  DataError(const std::string& m, long row = 0) : Error(ErrorCode::kData, m), row_(row) {}

  long row() const noexcept { return row_; }

 private:
  long row_;
};

class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& m) : Error(ErrorCode::kEstimation, m) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& m) : Error(ErrorCode::kArgument, m) {}
};

}  // namespace mrg
