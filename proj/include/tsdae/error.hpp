#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tsdae {

/// Error categories raised by the library. Every thrown tsdae::Error carries one.
enum class Errc {
  NotAGridPoint,
  LastPointUndefined,
  NonSquare,
  ParseError,
  EvalError,
  IllConditionedBasis,
  NotTransversal,
  DimensionMismatch,
  InverseConditionsViolated,
  NotProperlyStated,
  RankDrift,
  AdmissibilityViolation,
  NotIndexOne,
  ProjectorInvalid,
  InsufficientTrajectory,
  NonRegressiveStep,
  OracleStepSingular,
  SchemaError,
  InvalidArgument,
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotAGridPoint: return "NotAGridPoint";
    case Errc::LastPointUndefined: return "LastPointUndefined";
    case Errc::NonSquare: return "NonSquare";
    case Errc::ParseError: return "ParseError";
    case Errc::EvalError: return "EvalError";
    case Errc::IllConditionedBasis: return "IllConditionedBasis";
    case Errc::NotTransversal: return "NotTransversal";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InverseConditionsViolated: return "InverseConditionsViolated";
    case Errc::NotProperlyStated: return "NotProperlyStated";
    case Errc::RankDrift: return "RankDrift";
    case Errc::AdmissibilityViolation: return "AdmissibilityViolation";
    case Errc::NotIndexOne: return "NotIndexOne";
    case Errc::ProjectorInvalid: return "ProjectorInvalid";
    case Errc::InsufficientTrajectory: return "InsufficientTrajectory";
    case Errc::NonRegressiveStep: return "NonRegressiveStep";
    case Errc::OracleStepSingular: return "OracleStepSingular";
    case Errc::SchemaError: return "SchemaError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Expression syntax error; offset is the byte position in the source text.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(Errc::ParseError, "at offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Expression evaluation failure (division by zero). Entry is (row, col), zero-based.
class EvalError : public Error {
 public:
  EvalError(double t, const std::string& message,
            std::optional<std::pair<std::size_t, std::size_t>> entry = std::nullopt)
      : Error(Errc::EvalError, describe(t, message, entry)), t_(t), entry_(entry) {}

  double t() const noexcept { return t_; }
  const std::optional<std::pair<std::size_t, std::size_t>>& entry() const noexcept {
    return entry_;
  }

 private:
  static std::string describe(double t, const std::string& message,
                              const std::optional<std::pair<std::size_t, std::size_t>>& entry) {
    std::string out = message + " at t=" + std::to_string(t);
    if (entry) {
      out += " in entry (" + std::to_string(entry->first + 1) + "," +
             std::to_string(entry->second + 1) + ")";
    }
    return out;
  }

  double t_;
  std::optional<std::pair<std::size_t, std::size_t>> entry_;
};

}  // namespace tsdae
