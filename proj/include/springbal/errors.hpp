#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace springbal {

enum class ErrorCode {
  kUnreachable,
  kSingular,
  kEmptyWorkspace,
  kBoundsViolation,
  kAllGuarded,
  kRankDeficient,
  kNoTangent,
  kMultipleTangents,
  kQuadratureFailure,
  kSlackWire,
  kInfeasibleTorque,
  kGeometryInfeasible,
  kSynthesisDiverged,
  kRangeExceeded,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix, for re-wrapping with more context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

class UnreachableError : public Error {
 public:
  explicit UnreachableError(int leg, double distance);
  int leg() const noexcept { return leg_; }

 private:
  int leg_;
};

class SingularError : public Error {
 public:
  SingularError(std::string matrix, double condition);
  const std::string& matrix() const noexcept { return matrix_; }
  double condition() const noexcept { return condition_; }

 private:
  std::string matrix_;
  double condition_;
};

class MultipleTangentsError : public Error {
 public:
  explicit MultipleTangentsError(std::vector<double> roots);
  const std::vector<double>& roots() const noexcept { return roots_; }

 private:
  std::vector<double> roots_;
};

// Raised by path-level evaluations; wraps the per-pose failure with its index.
class PathError : public Error {
 public:
  PathError(std::size_t index, const Error& cause);
  std::size_t index() const noexcept { return index_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::size_t index_;
  ErrorCode cause_;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace springbal
