#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratkern {

enum class ErrorCode {
  InvalidSpec,
  ParameterOutOfDomain,
  DenominatorRoot,
  DenominatorNormalization,
  NoSuchTarget,
  RootNotBracketed,
  QuadratureNonconvergence,
  UnsupportedFamily,
  EmptyRow,
  DimsNotDivisible,
  DimMismatch,
  TooSmall,
  RankDeficient,
  ParseError,
  MissingInput,
  IoError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParameterOutOfDomain: return "ParameterOutOfDomain";
    case ErrorCode::DenominatorRoot: return "DenominatorRoot";
    case ErrorCode::DenominatorNormalization: return "DenominatorNormalization";
    case ErrorCode::NoSuchTarget: return "NoSuchTarget";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::QuadratureNonconvergence: return "QuadratureNonconvergence";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::DimsNotDivisible: return "DimsNotDivisible";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ratkern
