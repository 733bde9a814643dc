#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace biflab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Unit-circle multiplier e^{2*i*pi*theta}.
inline cplx unit_multiplier(double theta) {
  return std::polar(1.0, 2.0 * kPi * theta);
}

enum class Errc {
  Ok = 0,
  Validation,
  NotPolynomial,
  EscapeOverflow,
  CollidedCriticalPoints,
  RootSolveFailure,
  PeriodTooLarge,
  NoConvergence,
  WrongExactPeriod,
  ContinuationStalled,
  CyclesCollided,
  RankDeficient,
  LandingNotRepelling,
  DegenerateJacobian,
  RescueExhausted,
  NoCenterFound,
  ChartDegenerate,
  OutsideChart,
  PolishFailed,
  AlternationDiverged,
  FactorDiagnosticFailed,
  GridMismatch,
  InsufficientScales,
  InsufficientSpread,
  NoCertificateAvailable,
  NotFound,
  UnknownArtifactType,
  Io,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace biflab
