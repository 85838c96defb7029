#include "springbal/errors.hpp"

#include <sstream>

namespace springbal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kSingular: return "Singular";
    case ErrorCode::kEmptyWorkspace: return "EmptyWorkspace";
    case ErrorCode::kBoundsViolation: return "BoundsViolation";
    case ErrorCode::kAllGuarded: return "AllGuarded";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNoTangent: return "NoTangent";
    case ErrorCode::kMultipleTangents: return "MultipleTangents";
    case ErrorCode::kQuadratureFailure: return "QuadratureFailure";
    case ErrorCode::kSlackWire: return "SlackWire";
    case ErrorCode::kInfeasibleTorque: return "InfeasibleTorque";
    case ErrorCode::kGeometryInfeasible: return "GeometryInfeasible";
    case ErrorCode::kSynthesisDiverged: return "SynthesisDiverged";
    case ErrorCode::kRangeExceeded: return "RangeExceeded";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

UnreachableError::UnreachableError(int leg, double distance)
    : Error(ErrorCode::kUnreachable,
            "leg " + std::to_string(leg + 1) + " cannot reach its anchor (distance " +
                std::to_string(distance) + " m)"),
      leg_(leg) {}

namespace {
std::string singular_message(const std::string& matrix, double condition) {
  std::ostringstream os;
  os << "matrix " << matrix << " has condition estimate " << condition;
  return os.str();
}

std::string roots_message(const std::vector<double>& roots) {
  std::ostringstream os;
  os.precision(12);
  os << roots.size() << " tangent roots at phi =";
  for (double r : roots) os << ' ' << r;
  return os.str();
}
}  // namespace

SingularError::SingularError(std::string matrix, double condition)
    : Error(ErrorCode::kSingular, singular_message(matrix, condition)),
      matrix_(std::move(matrix)),
      condition_(condition) {}

MultipleTangentsError::MultipleTangentsError(std::vector<double> roots)
    : Error(ErrorCode::kMultipleTangents, roots_message(roots)), roots_(std::move(roots)) {}

PathError::PathError(std::size_t index, const Error& cause)
    : Error(cause.code(), "path sample " + std::to_string(index) + ": " + cause.detail()),
      index_(index),
      cause_(cause.code()) {}

ConfigError::ConfigError(int line, const std::string& what)
    : Error(ErrorCode::kConfig, line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

}  // namespace springbal
