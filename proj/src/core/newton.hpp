#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "types.hpp"

namespace biflab {

struct NewtonOptions {
  double tol = 1e-12;       // residual infinity-norm target
  int max_iter = 200;       // outer iterations
  int max_backtracks = 40;  // halving steps per iteration
  double step_limit = 0.0;  // 0 = unlimited; else clip |step|
};

struct NewtonResult {
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton for a small square complex-analytic system. The callback
/// fills F(x) and its complex Jacobian. Backtracking factor 1/2.
inline NewtonResult newton_solve(
    Eigen::VectorXcd& x,
    const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&,
                             Eigen::MatrixXcd&)>& system,
    const NewtonOptions& opts = {}) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXcd F(n), Ftrial(n);
  Eigen::MatrixXcd J(n, n);
  NewtonResult res;
  system(x, F, J);
  double fnorm = F.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it;
    res.residual = fnorm;
    if (fnorm <= opts.tol) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXcd step = J.colPivHouseholderQr().solve(F);
    if (!step.allFinite()) return res;
    if (opts.step_limit > 0.0) {
      double sn = step.norm();
      if (sn > opts.step_limit) step *= opts.step_limit / sn;
    }
    double damp = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      Eigen::VectorXcd trial = x - damp * step;
      Eigen::MatrixXcd Jtrial(n, n);
      system(trial, Ftrial, Jtrial);
      double tn = Ftrial.lpNorm<Eigen::Infinity>();
      if (std::isfinite(tn) && tn < fnorm) {
        x = trial;
        F = Ftrial;
        J = Jtrial;
        fnorm = tn;
        accepted = true;
        break;
      }
      damp *= 0.5;
    }
    if (!accepted) return res;  // stalled
  }
  res.residual = fnorm;
  res.converged = fnorm <= opts.tol;
  return res;
}

}  // namespace biflab
