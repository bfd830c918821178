#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hitlaw {

enum class ErrorCode {
  // sft
  NonBinaryEntry,
  EmptyRowOrColumn,
  NotPrimitive,
  InvalidShape,
  NoConvergence,
  CapExceeded,
  // measures
  BadProbabilityVector,
  InvalidMeasure,
  PotentialOnForbiddenEdge,
  NonFinitePotential,
  CutoffTooLarge,
  MixedLength,
  InadmissibleWord,
  WindowTooLong,
  // families
  EmptySet,
  DescriptorInvalid,
  NotInstantiable,
  FamilyNotShrinking,
  SubmatrixNotPrimitive,
  // oracle
  StateSpaceTooLarge,
  HorizonExceeded,
  // monte carlo
  AllCensored,
  EmptySample,
  // experiment
  ConfigError,
  MissingArtifacts,
  ParseError,
  Internal,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonBinaryEntry: return "NonBinaryEntry";
    case ErrorCode::EmptyRowOrColumn: return "EmptyRowOrColumn";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::BadProbabilityVector: return "BadProbabilityVector";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::PotentialOnForbiddenEdge: return "PotentialOnForbiddenEdge";
    case ErrorCode::NonFinitePotential: return "NonFinitePotential";
    case ErrorCode::CutoffTooLarge: return "CutoffTooLarge";
    case ErrorCode::MixedLength: return "MixedLength";
    case ErrorCode::InadmissibleWord: return "InadmissibleWord";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::DescriptorInvalid: return "DescriptorInvalid";
    case ErrorCode::NotInstantiable: return "NotInstantiable";
    case ErrorCode::FamilyNotShrinking: return "FamilyNotShrinking";
    case ErrorCode::SubmatrixNotPrimitive: return "SubmatrixNotPrimitive";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::AllCensored: return "AllCensored";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. Every failure in the library
/// is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hitlaw
