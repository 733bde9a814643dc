#include "types.hpp"

namespace biflab {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Ok: return "ok";
    case Errc::Validation: return "validation";
    case Errc::NotPolynomial: return "not_polynomial";
    case Errc::EscapeOverflow: return "escape_overflow";
    case Errc::CollidedCriticalPoints: return "collided_critical_points";
    case Errc::RootSolveFailure: return "root_solve_failure";
    case Errc::PeriodTooLarge: return "period_too_large";
    case Errc::NoConvergence: return "no_convergence";
    case Errc::WrongExactPeriod: return "wrong_exact_period";
    case Errc::ContinuationStalled: return "continuation_stalled";
    case Errc::CyclesCollided: return "cycles_collided";
    case Errc::RankDeficient: return "rank_deficient";
    case Errc::LandingNotRepelling: return "landing_not_repelling";
    case Errc::DegenerateJacobian: return "degenerate_jacobian";
    case Errc::RescueExhausted: return "rescue_exhausted";
    case Errc::NoCenterFound: return "no_center_found";
    case Errc::ChartDegenerate: return "chart_degenerate";
    case Errc::OutsideChart: return "outside_chart";
    case Errc::PolishFailed: return "polish_failed";
    case Errc::AlternationDiverged: return "alternation_diverged";
    case Errc::FactorDiagnosticFailed: return "factor_diagnostic_failed";
    case Errc::GridMismatch: return "grid_mismatch";
    case Errc::InsufficientScales: return "insufficient_scales";
    case Errc::InsufficientSpread: return "insufficient_spread";
    case Errc::NoCertificateAvailable: return "no_certificate_available";
    case Errc::NotFound: return "not_found";
    case Errc::UnknownArtifactType: return "unknown_artifact_type";
    case Errc::Io: return "io";
  }
  return "unknown";
}

}  // namespace biflab
