#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace peri {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Errc {
  InvalidGrid,
  InvalidParameter,
  NonPositiveScale,
  TailTooHeavy,
  NotEven,
  LengthMismatch,
  CurvatureUnavailable,
  NegativePotential,
  WrongNonlinearity,
  DegenerateData,
  NoConvergence,
  BallEscape,
  BlowupDetected,
  NonNegativeEnergy,
  BadNu,
  Config,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::TailTooHeavy: return "TailTooHeavy";
    case Errc::NotEven: return "NotEven";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::CurvatureUnavailable: return "CurvatureUnavailable";
    case Errc::NegativePotential: return "NegativePotential";
    case Errc::WrongNonlinearity: return "WrongNonlinearity";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::BallEscape: return "BallEscape";
    case Errc::BlowupDetected: return "BlowupDetected";
    case Errc::NonNegativeEnergy: return "NonNegativeEnergy";
    case Errc::BadNu: return "BadNu";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace peri
