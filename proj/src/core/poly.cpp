#include "poly.hpp"

#include <algorithm>
#include <cmath>

namespace biflab {

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.zero() || b.zero()) return Poly{};
  std::vector<cplx> out(a.c.size() + b.c.size() - 1, cplx(0.0, 0.0));
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
  return Poly(std::move(out));
}

Poly poly_compose(const Poly& p, const Poly& q) {
  Poly acc;  // Horner in q
  for (auto it = p.c.rbegin(); it != p.c.rend(); ++it) {
    acc = poly_mul(acc, q);
    if (acc.c.empty()) acc.c.resize(1, cplx(0.0, 0.0));
    acc.c[0] += *it;
    acc.trim();
  }
  return acc;
}

std::vector<cplx> aberth_roots(const Poly& p, double tol, int max_iter) {
  Poly q = p;
  q.trim();
  int n = q.degree();
  if (n < 1) return {};
  if (n == 1) return {-q.c[0] / q.c[1]};

  // Cauchy-style inclusion radius for the starting circle.
  double lead = std::abs(q.c.back());
  double radius = 0.0;
  for (int k = 0; k < n; ++k)
    radius = std::max(radius, std::pow(std::abs(q.c[k]) / lead,
                                       1.0 / static_cast<double>(n - k)));
  radius = 2.0 * radius + 1.0;

  std::vector<cplx> z(n);
  for (int k = 0; k < n; ++k) {
    double ang = 2.0 * kPi * (k + 0.25) / n + 0.5;  // irrational-ish offset
    z[k] = std::polar(radius, ang);
  }

  Poly dq = q.derivative();
  std::vector<cplx> step(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      cplx pk = q(z[k]);
      cplx dk = dq(z[k]);
      cplx ratio = (dk != cplx(0.0, 0.0)) ? pk / dk : cplx(0.0, 0.0);
      cplx sum(0.0, 0.0);
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        cplx diff = z[k] - z[j];
        if (std::abs(diff) < 1e-300) diff = cplx(1e-300, 0.0);
        sum += 1.0 / diff;
      }
      cplx denom = 1.0 - ratio * sum;
      step[k] = (std::abs(denom) > 1e-300) ? ratio / denom : ratio;
      worst = std::max(worst, std::abs(step[k]) / (1.0 + std::abs(z[k])));
    }
    for (int k = 0; k < n; ++k) z[k] -= step[k];
    if (worst < tol) return z;
  }

  // Accept if residuals are small even when the displacement test stalls
  // (clustered roots wobble at the cluster scale).
  double scale = q.coeff_magnitude_sum();
  for (int k = 0; k < n; ++k) {
    if (std::abs(q(z[k])) > 1e-6 * (1.0 + scale))
      fail(Errc::RootSolveFailure, "aberth iteration did not converge");
  }
  return z;
}

std::vector<cplx> poly_solve(const Poly& p, cplx target) {
  Poly q = p;
  if (q.c.empty()) q.c.resize(1, cplx(0.0, 0.0));
  q.c[0] -= target;
  return aberth_roots(q);
}

}  // namespace biflab
