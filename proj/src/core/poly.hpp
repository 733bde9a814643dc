#pragma once

#include <span>
#include <vector>

#include "types.hpp"

namespace biflab {

/// Dense univariate polynomial with complex coefficients, c[k] * z^k.
struct Poly {
  std::vector<cplx> c;

  Poly() = default;
  explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) { trim(); }

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool zero() const { return c.empty(); }

  cplx operator()(cplx z) const {
    cplx acc(0.0, 0.0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Poly derivative() const {
    if (c.size() <= 1) return Poly{};
    std::vector<cplx> d(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k)
      d[k - 1] = c[k] * static_cast<double>(k);
    return Poly(std::move(d));
  }

  void trim() {
    while (!c.empty() && std::abs(c.back()) == 0.0) c.pop_back();
  }

  double coeff_magnitude_sum() const {
    double s = 0.0;
    for (const auto& a : c) s += std::abs(a);
    return s;
  }
};

Poly poly_mul(const Poly& a, const Poly& b);

/// Coefficients of p(q(z)); grows as deg(p)*deg(q), caller bounds the degree.
Poly poly_compose(const Poly& p, const Poly& q);

/// All complex roots by Aberth–Ehrlich simultaneous iteration.
/// Throws RootSolveFailure if the iteration does not settle.
std::vector<cplx> aberth_roots(const Poly& p, double tol = 1e-13,
                               int max_iter = 400);

/// Roots of p(z) = target (shifts the constant coefficient).
std::vector<cplx> poly_solve(const Poly& p, cplx target);

}  // namespace biflab
