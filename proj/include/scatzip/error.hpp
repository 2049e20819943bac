#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scatzip {

enum class ErrorCode {
  NotHermitian,
  NotPSD,
  Singular,
  SingularDenominator,
  NotContraction,
  NotUnitary,
  NotInUInv,
  SingularBeta,
  NotLorentz,
  SingularD,
  OddN,
  MissingBlock,
  MissingS1,
  WrongFlavor,
  DimensionMismatch,
  SizeMismatch,
  CapExceeded,
  ZeroZ,
  OutsideDisc,
  DegenerateFrame,
  ImpossibleByTheory,
  SingularBlock,
  NotOnSurface,
  DegenerateGram,
  DegeneratePhiBlock,
  CrossingCountMismatch,
  ParseError,
  GridOutsideDisc,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::NotContraction: return "NotContraction";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NotInUInv: return "NotInUInv";
    case ErrorCode::SingularBeta: return "SingularBeta";
    case ErrorCode::NotLorentz: return "NotLorentz";
    case ErrorCode::SingularD: return "SingularD";
    case ErrorCode::OddN: return "OddN";
    case ErrorCode::MissingBlock: return "MissingBlock";
    case ErrorCode::MissingS1: return "MissingS1";
    case ErrorCode::WrongFlavor: return "WrongFlavor";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::ZeroZ: return "ZeroZ";
    case ErrorCode::OutsideDisc: return "OutsideDisc";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::ImpossibleByTheory: return "ImpossibleByTheory";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::NotOnSurface: return "NotOnSurface";
    case ErrorCode::DegenerateGram: return "DegenerateGram";
    case ErrorCode::DegeneratePhiBlock: return "DegeneratePhiBlock";
    case ErrorCode::CrossingCountMismatch: return "CrossingCountMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GridOutsideDisc: return "GridOutsideDisc";
  }
  return "Unknown";
}

/// Numerical breakdowns are errors the theory says cannot happen for exact
/// inputs; everything else is a validation failure of the caller's data.
constexpr bool is_numerical_breakdown(ErrorCode code) {
  switch (code) {
    case ErrorCode::Singular:
    case ErrorCode::SingularDenominator:
    case ErrorCode::DegenerateFrame:
    case ErrorCode::ImpossibleByTheory:
    case ErrorCode::SingularBlock:
    case ErrorCode::DegenerateGram:
    case ErrorCode::DegeneratePhiBlock:
    case ErrorCode::CrossingCountMismatch:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scatzip
