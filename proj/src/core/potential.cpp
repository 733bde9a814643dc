#include "potential.hpp"

#include <cmath>

#include "rng.hpp"

namespace biflab {

namespace {
// beyond this modulus the orbit is in the asymptotic regime to machine
// precision; chosen so |z|^d stays representable for d <= 3-4
constexpr double kAsymptotic = 1e60;
}  // namespace

GreenEvaluation green_poly(const Poly& p, cplx z, int max_depth,
                           double escape_radius) {
  const int d = p.degree();
  const double log_lead = std::log(std::abs(p.c.back()));
  GreenEvaluation out;
  double invdn = 1.0;  // d^{-n}
  cplx w = z;
  for (int n = 0; n <= max_depth; ++n) {
    double mag = std::abs(w);
    if (mag > kAsymptotic || !std::isfinite(mag)) {
      if (!std::isfinite(mag)) mag = 1e308;  // caller fed an overflowed point
      // telescoped limit: G = d^{-n} log|z_n| + d^{-n} log|a_d| / (d-1)
      out.value = invdn * (std::log(mag) + log_lead / (d - 1));
      out.depth = n;
      out.converged = true;
      return out;
    }
    if (n == max_depth) break;
    w = p(w);
    invdn /= d;
  }
  double mag = std::abs(w);
  if (mag > escape_radius) {
    // escaped but did not reach the asymptotic regime within budget
    out.value = std::max(0.0, invdn * (std::log(mag) + log_lead / (d - 1)));
    out.depth = max_depth;
    out.converged = false;
    return out;
  }
  out.value = 0.0;
  out.depth = max_depth;
  out.converged = true;
  return out;
}

GreenEvaluation green(const Family& fam, std::span<const cplx> lambda, cplx z,
                      int max_depth) {
  Poly p = fam.instantiate(lambda);
  return green_poly(p, z, max_depth, fam.default_escape_radius(lambda));
}

EquilibriumSample equilibrium_sample(const Family& fam,
                                     std::span<const cplx> lambda,
                                     int n_points, std::uint64_t seed) {
  if (n_points < 0) fail(Errc::Validation, "n_points must be >= 0");
  EquilibriumSample out;
  out.seed = seed;
  if (n_points == 0) return out;

  Poly p = fam.instantiate(lambda);
  const int d = p.degree();
  Rng rng(seed);
  // fixed generic start; the burn-in pulls it onto the Julia set
  cplx z(0.7548776662466927, 0.3251234529017943);

  auto pull_back = [&](cplx w) -> cplx {
    for (int attempt = 0; attempt < 8; ++attempt) {
      std::vector<cplx> roots;
      try {
        roots = poly_solve(p, w);
      } catch (const Error&) {
        w += cplx(1e-12 * (attempt + 1), 1e-12);  // degenerate fiber, nudge
        continue;
      }
      if (static_cast<int>(roots.size()) == d)
        return roots[rng.below(static_cast<std::uint64_t>(d))];
      w += cplx(1e-12 * (attempt + 1), 1e-12);
    }
    fail(Errc::RootSolveFailure, "inverse branch sampling failed");
  };

  for (int k = 0; k < out.burn_in; ++k) z = pull_back(z);
  out.points.reserve(n_points);
  for (int k = 0; k < n_points; ++k) {
    z = pull_back(z);
    out.points.push_back(z);
  }
  return out;
}

LyapunovEstimate lyapunov(const Family& fam, std::span<const cplx> lambda,
                          int n_points, std::uint64_t seed) {
  LyapunovEstimate est;
  est.seed = seed;
  est.n_points = n_points;

  EquilibriumSample sample = equilibrium_sample(fam, lambda, n_points, seed);
  Poly dp = fam.instantiate(lambda).derivative();
  double sum = 0.0, sumsq = 0.0;
  int used = 0;
  for (cplx z : sample.points) {
    double m = std::abs(dp(z));
    if (m <= 0.0) continue;  // measure-zero hit of a critical point
    double v = std::log(m);
    sum += v;
    sumsq += v * v;
    ++used;
  }
  if (used > 0) {
    est.l_mc = sum / used;
    double var = std::max(0.0, sumsq / used - est.l_mc * est.l_mc);
    est.stderr_mc = std::sqrt(var / used);
  }

  const int d = fam.degree();
  double g_sum = 0.0;
  for (const auto& cp : fam.critical_points(lambda))
    g_sum += cp.multiplicity * green(fam, lambda, cp.z, 512).value;
  est.l_green = std::log(static_cast<double>(d)) + g_sum;
  return est;
}

}  // namespace biflab
