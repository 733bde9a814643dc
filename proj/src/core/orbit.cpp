#include "orbit.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace biflab {

MapJet make_map_jet(const Family& fam, std::span<const cplx> lambda,
                    std::span<const std::vector<cplx>> dirs) {
  MapJet m;
  m.P = fam.instantiate(lambda);
  m.dP = m.P.derivative();
  m.d2P = m.dP.derivative();
  for (const auto& dir : dirs) {
    Poly pt = fam.instantiate_dir(lambda, dir);
    m.dPt.push_back(pt.derivative());
    m.Pt.push_back(std::move(pt));
  }
  return m;
}

void jet_step(const MapJet& m, JetState& s) {
  cplx dp = m.dP(s.z);
  for (size_t j = 0; j < s.d.size(); ++j) {
    cplx inhom(0.0, 0.0);
    if (s.dir_index[j] >= 0) inhom = m.Pt[s.dir_index[j]](s.z);
    s.d[j] = dp * s.d[j] + inhom;
  }
  s.z = m.P(s.z);
}

void jet_step_with_multiplier(const MapJet& m, JetState& s,
                              MultiplierJet& mult) {
  cplx dp = m.dP(s.z);
  cplx d2p = m.d2P(s.z);
  if (mult.dM.size() != s.d.size()) mult.dM.resize(s.d.size(), cplx(0.0, 0.0));
  for (size_t j = 0; j < s.d.size(); ++j) {
    cplx dprime = d2p * s.d[j];
    if (s.dir_index[j] >= 0) dprime += m.dPt[s.dir_index[j]](s.z);
    mult.dM[j] = mult.dM[j] * dp + mult.M * dprime;
  }
  mult.M *= dp;
  jet_step(m, s);
}

SecondOrderJet iterate_second_order(const Poly& P, const Poly& dP,
                                    const Poly& d2P, cplx z0, int n) {
  SecondOrderJet s{z0, cplx(1.0, 0.0), cplx(0.0, 0.0)};
  for (int k = 0; k < n; ++k) {
    cplx dp = dP(s.z);
    cplx d2p = d2P(s.z);
    s.d2 = d2p * s.d1 * s.d1 + dp * s.d2;
    s.d1 = dp * s.d1;
    s.z = P(s.z);
  }
  return s;
}

cplx refine_periodic_point(const Poly& P, cplx z0, int p, double tol,
                           cplx* multiplier_out, int max_iter) {
  Poly dP = P.derivative();
  cplx z = z0;
  for (int it = 0; it < max_iter; ++it) {
    cplx w = z, mult(1.0, 0.0);
    for (int k = 0; k < p; ++k) {
      mult *= dP(w);
      w = P(w);
    }
    cplx res = w - z;
    cplx jac = mult - cplx(1.0, 0.0);
    if (std::abs(res) <= tol * (1.0 + std::abs(z))) {
      if (multiplier_out) *multiplier_out = mult;
      return z;
    }
    if (std::abs(jac) < 1e-300)
      fail(Errc::NoConvergence, "periodic point refinement: singular Newton");
    z -= res / jac;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      fail(Errc::NoConvergence, "periodic point refinement diverged");
  }
  fail(Errc::NoConvergence, "periodic point refinement stalled");
}

cplx cycle_multiplier(const Poly& P, cplx z, int p) {
  Poly dP = P.derivative();
  cplx m(1.0, 0.0);
  for (int k = 0; k < p; ++k) {
    m *= dP(z);
    z = P(z);
  }
  return m;
}

int exact_period(const Poly& P, cplx z, int p, double tol) {
  for (int q = 1; q <= p; ++q) {
    if (p % q != 0) continue;
    cplx w = z;
    for (int k = 0; k < q; ++k) w = P(w);
    if (std::abs(w - z) <= tol * (1.0 + std::abs(z))) return q;
  }
  return p;
}

// ------------------------------------------------- slice constraint corrector

namespace {

std::vector<cplx> assemble(const Slice& s, std::span<const cplx> t,
                           std::span<const cplx> corr) {
  std::vector<cplx> lam = s.base;
  for (size_t j = 0; j < s.dirs.size(); ++j)
    for (size_t v = 0; v < lam.size(); ++v) lam[v] += t[j] * s.dirs[j][v];
  for (size_t l = 0; l < corr.size(); ++l)
    for (size_t v = 0; v < lam.size(); ++v)
      lam[v] += corr[l] * s.corrector_dirs[l][v];
  return lam;
}

}  // namespace

std::vector<cplx> slice_point(const Family& fam, const Slice& slice,
                              std::span<const cplx> t, double tol) {
  if (static_cast<int>(t.size()) != slice.dim())
    fail(Errc::Validation, "slice coordinate arity mismatch");
  if (slice.constraints.empty()) return assemble(slice, t, {});
  if (slice.constraints.size() != slice.corrector_dirs.size())
    fail(Errc::Validation, "corrector directions must match constraints");

  const int nc = static_cast<int>(slice.constraints.size());
  std::vector<cplx> corr(nc, cplx(0.0, 0.0));
  for (int it = 0; it < 60; ++it) {
    std::vector<cplx> lam = assemble(slice, t, corr);
    MapJet m = make_map_jet(fam, lam, slice.corrector_dirs);
    Eigen::VectorXcd G(nc);
    Eigen::MatrixXcd J(nc, nc);
    for (int l = 0; l < nc; ++l) {
      const auto& cst = slice.constraints[l];
      JetState s;
      s.z = fam.marked_point(cst.crit_index, lam);
      for (int j = 0; j < nc; ++j)
        s.add_channel(j, fam.marked_point_dir(cst.crit_index, lam,
                                              slice.corrector_dirs[j]));
      cplx zm;
      std::vector<cplx> dzm(nc);
      for (int k = 0; k < cst.preperiod + cst.period; ++k) {
        if (k == cst.preperiod) {
          zm = s.z;
          dzm = s.d;
        }
        jet_step(m, s);
      }
      G(l) = s.z - zm;
      for (int j = 0; j < nc; ++j) J(l, j) = s.d[j] - dzm[j];
    }
    if (G.norm() <= tol) return assemble(slice, t, corr);
    Eigen::VectorXcd step = J.colPivHouseholderQr().solve(G);
    if (!step.allFinite())
      fail(Errc::NoConvergence, "slice corrector: singular Jacobian");
    for (int l = 0; l < nc; ++l) corr[l] -= step(l);
  }
  fail(Errc::NoConvergence, "slice corrector did not converge");
}

}  // namespace biflab
