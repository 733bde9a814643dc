#include "cycles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "newton.hpp"
#include "orbit.hpp"

namespace biflab {

const char* cycle_class_name(CycleClass c) {
  switch (c) {
    case CycleClass::Superattracting: return "superattracting";
    case CycleClass::Attracting: return "attracting";
    case CycleClass::Neutral: return "neutral";
    case CycleClass::Repelling: return "repelling";
  }
  return "?";
}

CycleClass classify_multiplier(cplx m, double tol) {
  double mag = std::abs(m);
  if (mag < tol) return CycleClass::Superattracting;
  if (std::abs(mag - 1.0) <= tol) return CycleClass::Neutral;
  if (mag < 1.0) return CycleClass::Attracting;
  return CycleClass::Repelling;
}

namespace {

Cycle build_cycle(const Poly& P, cplx z, int exact_p, int multiplicity,
                  double tol) {
  Cycle c;
  c.multiplicity = multiplicity;
  cplx w = z;
  for (int k = 0; k < exact_p; ++k) {
    c.points.push_back(w);
    w = P(w);
  }
  c.residual = std::abs(w - z);
  c.multiplier = cycle_multiplier(P, z, exact_p);
  c.classification = classify_multiplier(c.multiplier);
  if (c.classification == CycleClass::Neutral)
    c.theta = std::arg(c.multiplier) / (2.0 * kPi);
  (void)tol;
  return c;
}

}  // namespace

std::vector<Cycle> periodic_points_all(const Family& fam,
                                       std::span<const cplx> lambda, int n,
                                       const CycleTolerances& tol) {
  if (n < 1) fail(Errc::Validation, "period must be >= 1");
  Poly P = fam.instantiate(lambda);
  const int d = P.degree();
  double dn = std::pow(static_cast<double>(d), n);
  if (dn > 4096.0) fail(Errc::PeriodTooLarge, "d^n exceeds 4096");

  std::vector<cplx> roots;
  if (dn <= 256.0) {
    // expand f^n and use simultaneous iteration
    Poly composed = P;
    for (int k = 1; k < n; ++k) composed = poly_compose(P, composed);
    composed.c.resize(std::max<size_t>(composed.c.size(), 2));
    composed.c[1] -= cplx(1.0, 0.0);
    composed.trim();
    roots = aberth_roots(composed);
  } else {
    // multi-start Newton on f^n(z) - z from a dynamical grid
    double lead = std::abs(P.c.back());
    double bound = std::max(1.0, (2.0 + P.coeff_magnitude_sum()) / lead);
    Poly dP = P.derivative();
    const int grid = 64;
    for (int gy = 0; gy < grid; ++gy)
      for (int gx = 0; gx < grid; ++gx) {
        cplx z(-bound + (2.0 * bound) * (gx + 0.5) / grid,
               -bound + (2.0 * bound) * (gy + 0.5) / grid);
        bool ok = true;
        for (int it = 0; it < 80; ++it) {
          cplx w = z, A(1.0, 0.0);
          for (int k = 0; k < n; ++k) {
            A *= dP(w);
            w = P(w);
            if (std::abs(w) > 1e8) { ok = false; break; }
          }
          if (!ok) break;
          cplx res = w - z;
          if (std::abs(res) < 1e-13 * (1.0 + std::abs(z))) break;
          cplx jac = A - cplx(1.0, 0.0);
          if (std::abs(jac) < 1e-300) { ok = false; break; }
          z -= res / jac;
        }
        if (!ok) continue;
        cplx w = z;
        for (int k = 0; k < n; ++k) w = P(w);
        if (std::abs(w - z) > 1e-10 * (1.0 + std::abs(z))) continue;
        bool dup = false;
        for (cplx r : roots)
          if (std::abs(r - z) < 1e-8) { dup = true; break; }
        if (!dup) roots.push_back(z);
      }
  }

  // cluster near-coincident roots (degenerate / merging cycles)
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  struct Cluster { cplx z; int count; };
  std::vector<Cluster> clusters;
  std::vector<bool> used(roots.size(), false);
  for (size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    Cluster cl{roots[i], 1};
    used[i] = true;
    for (size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(roots[j] - cl.z) < tol.cluster) {
        cl.z = (cl.z * static_cast<double>(cl.count) + roots[j]) /
               static_cast<double>(cl.count + 1);
        ++cl.count;
        used[j] = true;
      }
    }
    clusters.push_back(cl);
  }

  std::vector<Cycle> out;
  std::vector<bool> visited(clusters.size(), false);
  for (size_t i = 0; i < clusters.size(); ++i) {
    if (visited[i]) continue;
    visited[i] = true;
    cplx rep = clusters[i].z;
    if (clusters[i].count == 1) {
      try {
        rep = refine_periodic_point(P, rep, n, 1e-13);
      } catch (const Error&) { /* keep raw root */ }
    }
    int exact = exact_period(P, rep, n, 1e-7);
    // mark every found cluster lying on this orbit so the cycle is
    // reported once even when the root set is incomplete
    cplx w = rep;
    for (int step = 0; step < exact; ++step) {
      for (size_t j = 0; j < clusters.size(); ++j)
        if (!visited[j] && std::abs(w - clusters[j].z) < 10.0 * tol.cluster)
          visited[j] = true;
      w = P(w);
    }
    out.push_back(build_cycle(P, rep, exact, clusters[i].count, tol.tol_cycle));
  }
  return out;
}

std::vector<Cycle> periodic_points(const Family& fam,
                                   std::span<const cplx> lambda, int n,
                                   const CycleTolerances& tol) {
  std::vector<Cycle> all = periodic_points_all(fam, lambda, n, tol);
  std::vector<Cycle> out;
  for (auto& c : all)
    if (c.period() == n) out.push_back(std::move(c));
  return out;
}

// -------------------------------------------------------------------- slices

std::vector<std::vector<cplx>> slice_tangents(const Family& fam,
                                              const Slice& slice,
                                              std::span<const cplx> t) {
  if (slice.constraints.empty()) return slice.dirs;

  std::vector<cplx> lam = slice_point(fam, slice, t);
  const int k = slice.dim();
  const int nc = static_cast<int>(slice.constraints.size());

  // dG/ds (corrector block) and dG/dt
  std::vector<std::vector<cplx>> all_dirs = slice.dirs;
  all_dirs.insert(all_dirs.end(), slice.corrector_dirs.begin(),
                  slice.corrector_dirs.end());
  MapJet m = make_map_jet(fam, lam, all_dirs);
  Eigen::MatrixXcd Gt(nc, k), Gs(nc, nc);
  for (int l = 0; l < nc; ++l) {
    const auto& cst = slice.constraints[l];
    JetState s;
    s.z = fam.marked_point(cst.crit_index, lam);
    for (int j = 0; j < k + nc; ++j)
      s.add_channel(j, fam.marked_point_dir(cst.crit_index, lam, all_dirs[j]));
    cplx zm;
    std::vector<cplx> dzm;
    for (int step = 0; step < cst.preperiod + cst.period; ++step) {
      if (step == cst.preperiod) { zm = s.z; dzm = s.d; }
      jet_step(m, s);
    }
    for (int j = 0; j < k; ++j) Gt(l, j) = s.d[j] - dzm[j];
    for (int j = 0; j < nc; ++j) Gs(l, j) = s.d[k + j] - dzm[k + j];
  }
  Eigen::MatrixXcd dsdt = -Gs.colPivHouseholderQr().solve(Gt);  // nc x k
  std::vector<std::vector<cplx>> tangents(k);
  for (int j = 0; j < k; ++j) {
    tangents[j] = slice.dirs[j];
    for (int l = 0; l < nc; ++l)
      for (size_t v = 0; v < tangents[j].size(); ++v)
        tangents[j][v] += dsdt(l, j) * slice.corrector_dirs[l][v];
  }
  return tangents;
}

// ----------------------------------------------------------------- solve_per

PerSolution solve_per(const Family& fam, const Slice& slice, int n, cplx w,
                      cplx t_seed, cplx z_seed, const SolveOptions& opts) {
  if (slice.dim() != 1) fail(Errc::Validation, "solve_per needs a 1d slice");
  if (std::abs(w - cplx(1.0, 0.0)) < 1e-12)
    fail(Errc::Validation, "w = 1 is outside the solve_per contract");

  auto system = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& F,
                    Eigen::MatrixXcd& J) {
    std::vector<cplx> tv{x(0)};
    std::vector<cplx> lam;
    std::vector<std::vector<cplx>> tangents;
    try {
      lam = slice_point(fam, slice, tv);
      tangents = slice_tangents(fam, slice, tv);
    } catch (const Error&) {
      F.setConstant(cplx(1e30, 0.0));
      J.setIdentity();
      return;
    }
    MapJet m = make_map_jet(fam, lam, tangents);
    JetState s;
    s.z = x(1);
    s.add_channel(0, cplx(0.0, 0.0));   // parameter channel
    s.add_channel(-1, cplx(1.0, 0.0));  // initial-condition channel
    MultiplierJet mult;
    for (int k = 0; k < n; ++k) jet_step_with_multiplier(m, s, mult);
    F(0) = s.z - x(1);
    F(1) = mult.M - w;
    J(0, 0) = s.d[0];
    J(0, 1) = s.d[1] - cplx(1.0, 0.0);
    J(1, 0) = mult.dM[0];
    J(1, 1) = mult.dM[1];
  };

  Eigen::VectorXcd x(2);
  x << t_seed, z_seed;
  NewtonOptions nopts;
  nopts.tol = opts.tol;
  nopts.max_iter = opts.max_iter;
  nopts.max_backtracks = opts.max_backtracks;
  NewtonResult nr = newton_solve(x, system, nopts);
  if (!nr.converged)
    fail(Errc::NoConvergence, "solve_per did not converge (residual " +
                                  std::to_string(nr.residual) + ")");

  PerSolution sol;
  sol.t = {x(0)};
  sol.lambda = slice_point(fam, slice, sol.t);
  sol.residual = nr.residual;
  Poly P = fam.instantiate(sol.lambda);
  int exact = exact_period(P, x(1), n, 1e-7);
  if (opts.require_exact_period && exact != n)
    fail(Errc::WrongExactPeriod,
         "converged to a cycle of exact period " + std::to_string(exact));
  sol.cycle = build_cycle(P, x(1), exact, 1, 1e-9);
  return sol;
}

ContinuationResult continue_per(const Family& fam, const Slice& slice, int n,
                                double theta_a, double theta_b, int steps,
                                cplx t_seed, cplx z_seed,
                                const SolveOptions& opts) {
  if (steps < 1) fail(Errc::Validation, "steps must be >= 1");
  ContinuationResult out;

  SolveOptions copts = opts;
  copts.max_iter = 60;
  PerSolution start =
      solve_per(fam, slice, n, unit_multiplier(theta_a), t_seed, z_seed, copts);
  out.path.push_back({theta_a, start});
  if (theta_a == theta_b) {
    out.completed = true;
    return out;
  }

  const double span = theta_b - theta_a;
  const double h0 = span / steps;
  const double h_min = std::abs(h0) / 1024.0;
  double theta = theta_a;
  double h = h0;
  cplx t_prev = start.t[0], z_prev = start.cycle.points[0];
  cplx t_cur = t_prev, z_cur = z_prev;
  double h_last = 0.0;

  while ((span > 0 ? theta < theta_b - 1e-15 : theta > theta_b + 1e-15)) {
    double step = (span > 0) ? std::min(h, theta_b - theta)
                             : std::max(-std::abs(h), theta_b - theta);
    double theta_next = theta + step;
    // secant predictor
    cplx t_pred = t_cur, z_pred = z_cur;
    if (h_last != 0.0) {
      double ratio = step / h_last;
      t_pred += (t_cur - t_prev) * ratio;
      z_pred += (z_cur - z_prev) * ratio;
    }
    bool accepted = false;
    try {
      PerSolution sol = solve_per(fam, slice, n, unit_multiplier(theta_next),
                                  t_pred, z_pred, copts);
      out.path.push_back({theta_next, sol});
      t_prev = t_cur; z_prev = z_cur;
      t_cur = sol.t[0];
      z_cur = sol.cycle.points[0];
      h_last = step;
      theta = theta_next;
      h = h0;
      accepted = true;
    } catch (const Error&) {
      h *= 0.5;
    }
    if (!accepted && std::abs(h) < h_min) return out;  // stalled, partial path
  }
  out.completed = true;
  return out;
}

// -------------------------------------------------------- solve_multi_neutral

void NeutralTargetSpec::validate() const {
  if (periods.empty() || periods.size() != thetas.size())
    fail(Errc::Validation, "neutral target spec arity mismatch");
  for (int n : periods)
    if (n < 1) fail(Errc::Validation, "periods must be >= 1");
  for (double th : thetas) {
    double frac = th - std::floor(th);
    if (std::min(frac, 1.0 - frac) < 1e-12)
      fail(Errc::Validation, "theta must not be an integer");
  }
}

NeutralSolution solve_multi_neutral(const Family& fam, const Slice& slice,
                                    const NeutralTargetSpec& spec,
                                    std::span<const cplx> t_seed,
                                    std::span<const cplx> z_seed,
                                    const NeutralOptions& opts) {
  spec.validate();
  const int k = spec.k();
  if (slice.dim() < k)
    fail(Errc::Validation, "slice dimension smaller than k");
  if (static_cast<int>(t_seed.size()) != slice.dim() ||
      static_cast<int>(z_seed.size()) != k)
    fail(Errc::Validation, "seed arity mismatch");
  const int dim = slice.dim();

  auto system = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& F,
                    Eigen::MatrixXcd& J) {
    std::vector<cplx> tv(dim);
    for (int j = 0; j < dim; ++j) tv[j] = x(j);
    std::vector<cplx> lam;
    std::vector<std::vector<cplx>> tangents;
    try {
      lam = slice_point(fam, slice, tv);
      tangents = slice_tangents(fam, slice, tv);
    } catch (const Error&) {
      F.setConstant(cplx(1e30, 0.0));
      J.setIdentity();
      return;
    }
    MapJet m = make_map_jet(fam, lam, tangents);
    J.setZero();
    for (int j = 0; j < k; ++j) {
      JetState s;
      s.z = x(dim + j);
      for (int l = 0; l < dim; ++l) s.add_channel(l, cplx(0.0, 0.0));
      s.add_channel(-1, cplx(1.0, 0.0));
      MultiplierJet mult;
      for (int step = 0; step < spec.periods[j]; ++step)
        jet_step_with_multiplier(m, s, mult);
      F(2 * j) = s.z - x(dim + j);
      F(2 * j + 1) = mult.M - unit_multiplier(spec.thetas[j]);
      for (int l = 0; l < dim; ++l) {
        J(2 * j, l) = s.d[l];
        J(2 * j + 1, l) = mult.dM[l];
      }
      J(2 * j, dim + j) = s.d[dim] - cplx(1.0, 0.0);
      J(2 * j + 1, dim + j) = mult.dM[dim];
    }
  };

  if (2 * k != dim + k)
    fail(Errc::Validation,
         "solve_multi_neutral requires slice dimension == k");

  Eigen::VectorXcd x(dim + k);
  for (int j = 0; j < dim; ++j) x(j) = t_seed[j];
  for (int j = 0; j < k; ++j) x(dim + j) = z_seed[j];
  NewtonOptions nopts;
  nopts.tol = opts.solve.tol;
  nopts.max_iter = opts.solve.max_iter;
  nopts.max_backtracks = opts.solve.max_backtracks;
  NewtonResult nr = newton_solve(x, system, nopts);
  if (!nr.converged)
    fail(Errc::NoConvergence, "solve_multi_neutral did not converge");

  NeutralSolution sol;
  sol.residual = nr.residual;
  sol.t.resize(dim);
  for (int j = 0; j < dim; ++j) sol.t[j] = x(j);
  sol.lambda = slice_point(fam, slice, sol.t);
  Poly P = fam.instantiate(sol.lambda);

  for (int j = 0; j < k; ++j) {
    cplx z = x(dim + j);
    int exact = exact_period(P, z, spec.periods[j], 1e-7);
    if (opts.solve.require_exact_period && exact != spec.periods[j])
      fail(Errc::WrongExactPeriod,
           "neutral cycle " + std::to_string(j) + " has exact period " +
               std::to_string(exact));
    sol.cycles.push_back(build_cycle(P, z, exact, 1, 1e-9));
  }

  // distinctness
  sol.min_cycle_separation = 1e300;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      for (cplx a : sol.cycles[i].points)
        for (cplx b : sol.cycles[j].points)
          sol.min_cycle_separation =
              std::min(sol.min_cycle_separation, std::abs(a - b));
  if (k == 1) sol.min_cycle_separation = 1e300;
  if (k > 1 && sol.min_cycle_separation <= opts.tol_sep)
    fail(Errc::CyclesCollided, "neutral cycles are not distinct");

  // rank certificate: total derivative of the k multiplier functions
  {
    std::vector<std::vector<cplx>> tangents =
        slice_tangents(fam, slice, sol.t);
    MapJet m = make_map_jet(fam, sol.lambda, tangents);
    Eigen::MatrixXcd W(k, dim);
    for (int j = 0; j < k; ++j) {
      JetState s;
      s.z = x(dim + j);
      for (int l = 0; l < dim; ++l) s.add_channel(l, cplx(0.0, 0.0));
      s.add_channel(-1, cplx(1.0, 0.0));
      MultiplierJet mult;
      for (int step = 0; step < spec.periods[j]; ++step)
        jet_step_with_multiplier(m, s, mult);
      cplx A = s.d[dim];  // (f^n)'(z) along the cycle = multiplier
      for (int l = 0; l < dim; ++l) {
        cplx dz_dt = -s.d[l] / (A - cplx(1.0, 0.0));
        W(j, l) = mult.dM[l] + mult.dM[dim] * dz_dt;
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(W);
    double smax = svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > opts.rank_rel_threshold * smax) ++rank;
    sol.jacobian_rank = rank;
    if (opts.require_full_rank && rank < k)
      fail(Errc::RankDeficient, "multiplier Jacobian rank " +
                                    std::to_string(rank) + " < k");
  }
  return sol;
}

}  // namespace biflab
