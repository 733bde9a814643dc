#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "family.hpp"
#include "types.hpp"

namespace biflab {

struct GreenEvaluation {
  double value = 0.0;  // log scale, >= 0
  int depth = 0;       // iterations actually used
  bool converged = false;
};

/// Escape-time Green function G(z) = lim d^{-n} log+ |f^n(z)|, telescoped
/// once the orbit escapes. Exact tail correction log|a_d|/(d-1) is applied
/// when the orbit reaches the asymptotic regime.
GreenEvaluation green(const Family& fam, std::span<const cplx> lambda, cplx z,
                      int max_depth = 256);

/// Same, with the instantiated polynomial precomputed (grid hot path).
GreenEvaluation green_poly(const Poly& p, cplx z, int max_depth,
                           double escape_radius);

struct EquilibriumSample {
  std::vector<cplx> points;
  std::uint64_t seed = 0;
  int burn_in = 50;
};

/// Sampling of the maximal entropy measure by iterated random inverse images.
/// Deterministic given seed. Throws RootSolveFailure if a pullback step fails
/// after bounded retries.
EquilibriumSample equilibrium_sample(const Family& fam,
                                     std::span<const cplx> lambda,
                                     int n_points, std::uint64_t seed);

struct LyapunovEstimate {
  double l_mc = 0.0;     // Monte Carlo over the equilibrium measure
  double l_green = 0.0;  // log d + sum_i G(c_i), independent cross-check
  double stderr_mc = 0.0;
  int n_points = 0;
  std::uint64_t seed = 0;
};

/// L(f) = int log|f'| d mu, Monte Carlo plus the Green-formula cross-check.
LyapunovEstimate lyapunov(const Family& fam, std::span<const cplx> lambda,
                          int n_points, std::uint64_t seed);

}  // namespace biflab
