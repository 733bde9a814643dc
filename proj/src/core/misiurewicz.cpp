#include "misiurewicz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "newton.hpp"
#include "orbit.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace biflab {

namespace {

// F(i) = f^{m_i+p_i}(c_i) - f^{m_i}(c_i), Jacobian in the slice coordinates.
void collision_system(const Family& fam, const Slice& slice,
                      std::span<const MisiurewiczConstraint> constraints,
                      const Eigen::VectorXcd& x, Eigen::VectorXcd& F,
                      Eigen::MatrixXcd& J) {
  const int k = static_cast<int>(constraints.size());
  const int dim = slice.dim();
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
  for (int i = 0; i < k; ++i) {
    const auto& cst = constraints[i];
    JetState s;
    s.z = fam.marked_point(cst.crit_index, lam);
    for (int l = 0; l < dim; ++l)
      s.add_channel(l, fam.marked_point_dir(cst.crit_index, lam, tangents[l]));
    cplx u{};
    std::vector<cplx> du;
    for (int step = 0; step < cst.preperiod + cst.period; ++step) {
      if (step == cst.preperiod) { u = s.z; du = s.d; }
      jet_step(m, s);
    }
    F(i) = s.z - u;
    for (int l = 0; l < dim; ++l) J(i, l) = s.d[l] - du[l];
  }
}

// Smallest (m', p') with p' | p, 1 <= m' <= m and f^{m'+p'}(c) = f^{m'}(c).
MisiurewiczConstraint minimal_labels(const Family& fam,
                                     std::span<const cplx> lambda,
                                     const MisiurewiczConstraint& cst,
                                     double tol) {
  Poly P = fam.instantiate(lambda);
  cplx c = fam.marked_point(cst.crit_index, lambda);
  std::vector<cplx> orbit{c};
  for (int s = 0; s < cst.preperiod + cst.period; ++s)
    orbit.push_back(P(orbit.back()));
  MisiurewiczConstraint out = cst;
  for (int q = 1; q <= cst.period; ++q) {
    if (cst.period % q != 0) continue;
    if (std::abs(orbit[cst.preperiod + q] - orbit[cst.preperiod]) > tol)
      continue;
    out.period = q;
    break;
  }
  for (int mm = 1; mm < cst.preperiod; ++mm) {
    if (std::abs(orbit[mm + out.period] - orbit[mm]) <= tol) {
      out.preperiod = mm;
      break;
    }
  }
  return out;
}

}  // namespace

MisiurewiczCertificate solve_misiurewicz(
    const Family& fam, const Slice& slice,
    std::span<const MisiurewiczConstraint> constraints,
    std::span<const cplx> t_seed, const MisiurewiczOptions& opts) {
  const int k = static_cast<int>(constraints.size());
  if (k < 1) fail(Errc::Validation, "at least one constraint required");
  if (slice.dim() != k)
    fail(Errc::Validation, "slice dimension must equal constraint count");
  if (static_cast<int>(t_seed.size()) != k)
    fail(Errc::Validation, "seed arity mismatch");
  for (int i = 0; i < k; ++i) {
    if (constraints[i].preperiod < 1 || constraints[i].period < 1)
      fail(Errc::Validation, "preperiod and period must be >= 1");
    if (constraints[i].crit_index < 0 ||
        constraints[i].crit_index >= fam.num_marked())
      fail(Errc::Validation, "critical index out of range");
  }

  Eigen::VectorXcd x(k);
  for (int i = 0; i < k; ++i) x(i) = t_seed[i];
  NewtonOptions nopts;
  nopts.tol = opts.tol;
  nopts.max_iter = opts.max_iter;
  nopts.max_backtracks = opts.max_backtracks;
  NewtonResult nr = newton_solve(
      x,
      [&](const Eigen::VectorXcd& xx, Eigen::VectorXcd& F,
          Eigen::MatrixXcd& J) {
        collision_system(fam, slice, constraints, xx, F, J);
      },
      nopts);
  if (!nr.converged)
    fail(Errc::NoConvergence, "collision system did not converge (residual " +
                                  std::to_string(nr.residual) + ")");

  MisiurewiczCertificate cert;
  cert.t.assign(x.data(), x.data() + k);
  cert.lambda = slice_point(fam, slice, cert.t);

  // canonical minimal labels
  for (int i = 0; i < k; ++i)
    cert.constraints.push_back(
        minimal_labels(fam, cert.lambda, constraints[i], 1e-8));

  // landing cycles: refine the periodic point reached after m steps
  Poly P = fam.instantiate(cert.lambda);
  for (const auto& cst : cert.constraints) {
    cplx z = fam.marked_point(cst.crit_index, cert.lambda);
    for (int s = 0; s < cst.preperiod; ++s) z = P(z);
    cplx mult{};
    cplx a = refine_periodic_point(P, z, cst.period, 1e-13, &mult);
    if (std::abs(mult) <= 1.0 + opts.repelling_margin)
      fail(Errc::LandingNotRepelling,
           "landing multiplier " + std::to_string(std::abs(mult)) +
               " is not repelling with margin");
    std::vector<cplx> orbit;
    cplx w = a;
    for (int s = 0; s < cst.period; ++s) {
      orbit.push_back(w);
      w = P(w);
    }
    cert.landing_cycles.push_back(std::move(orbit));
    cert.landing_multipliers.push_back(mult);
  }

  // residual and Jacobian at the solution with the minimal labels
  Eigen::VectorXcd F(k);
  Eigen::MatrixXcd J(k, k);
  collision_system(fam, slice, cert.constraints, x, F, J);
  cert.residual = F.lpNorm<Eigen::Infinity>();

  cert.transversality_det = J.determinant();
  double row_norm_product = 1.0;
  for (int i = 0; i < k; ++i) row_norm_product *= J.row(i).norm();
  cert.transversal =
      std::abs(cert.transversality_det) >
      opts.det_rel_threshold * row_norm_product;

  // chi rows by implicit differentiation of the landing cycle:
  // d chi_i = d G_i / (mult_i - 1)
  cert.chi_jacobian.assign(k, std::vector<cplx>(k));
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l)
      cert.chi_jacobian[i][l] =
          J(i, l) / (cert.landing_multipliers[i] - cplx(1.0, 0.0));

  Eigen::MatrixXcd Chi(k, k);
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l) Chi(i, l) = cert.chi_jacobian[i][l];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Chi);
  double smax = svd.singularValues()(0);
  cert.rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-6 * smax) ++cert.rank;

  if (opts.require_transversal && !cert.transversal)
    fail(Errc::DegenerateJacobian,
         "collision Jacobian determinant below the transversality threshold");
  return cert;
}

std::vector<MisiurewiczCertificate> multi_misiurewicz_sweep(
    const Family& fam, const Slice& slice, std::span<const Box> windows, int k,
    int max_preperiod, int max_period, int n_seeds, uint64_t seed,
    const MisiurewiczOptions& opts) {
  if (k < 1 || k > slice.dim())
    fail(Errc::Validation, "k out of range for the slice");
  if (static_cast<int>(windows.size()) != slice.dim())
    fail(Errc::Validation, "one window per slice coordinate required");
  if (n_seeds < 0) fail(Errc::Validation, "n_seeds must be >= 0");
  if (slice.dim() != k)
    fail(Errc::Validation, "sweep requires slice dimension == k");

  // constraint shapes: k distinct critical indices (increasing), all (m, p)
  // combinations per index
  std::vector<std::vector<MisiurewiczConstraint>> shapes;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  const int nc = fam.num_marked();
  if (nc < k) fail(Errc::Validation, "not enough marked critical points");
  std::vector<std::vector<int>> index_sets;
  // combinations of k indices out of nc
  std::vector<int> comb(k);
  for (int i = 0; i < k; ++i) comb[i] = i;
  while (true) {
    index_sets.push_back(comb);
    int i = k - 1;
    while (i >= 0 && comb[i] == nc - k + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  std::vector<MisiurewiczConstraint> shape(k);
  std::function<void(int, const std::vector<int>&)> enumerate =
      [&](int pos, const std::vector<int>& ids) {
        if (pos == k) {
          shapes.push_back(shape);
          return;
        }
        for (int m = 1; m <= max_preperiod; ++m)
          for (int p = 1; p <= max_period; ++p) {
            shape[pos] = MisiurewiczConstraint{ids[pos], m, p};
            enumerate(pos + 1, ids);
          }
      };
  for (const auto& ids : index_sets) enumerate(0, ids);

  MisiurewiczOptions sopts = opts;
  sopts.require_transversal = true;
  sopts.max_iter = 60;

  std::vector<std::vector<MisiurewiczCertificate>> found(
      std::max(n_seeds, 1));
  parallel_for(static_cast<size_t>(n_seeds), [&](size_t s) {
    Rng rng = Rng::keyed(seed, s);
    std::vector<cplx> t0(k);
    for (int j = 0; j < k; ++j)
      t0[j] = rng.in_rect(windows[j].x0, windows[j].x1, windows[j].y0,
                          windows[j].y1);
    for (const auto& sh : shapes) {
      try {
        MisiurewiczCertificate cert =
            solve_misiurewicz(fam, slice, sh, t0, sopts);
        bool inside = true;
        for (int j = 0; j < k; ++j) {
          const Box& b = windows[j];
          double mx = 0.05 * (b.x1 - b.x0), my = 0.05 * (b.y1 - b.y0);
          cplx tj = cert.t[j];
          if (tj.real() < b.x0 - mx || tj.real() > b.x1 + mx ||
              tj.imag() < b.y0 - my || tj.imag() > b.y1 + my)
            inside = false;
        }
        if (inside) found[s].push_back(std::move(cert));
      } catch (const Error&) {
        // misses are expected in a sweep
      }
    }
  });

  std::vector<MisiurewiczCertificate> merged;
  for (auto& v : found)
    for (auto& c : v) merged.push_back(std::move(c));
  std::stable_sort(merged.begin(), merged.end(),
                   [](const MisiurewiczCertificate& a,
                      const MisiurewiczCertificate& b) {
                     return a.residual < b.residual;
                   });
  std::vector<MisiurewiczCertificate> out;
  for (auto& c : merged) {
    bool dup = false;
    for (const auto& kept : out) {
      double d2 = 0.0;
      for (size_t j = 0; j < c.lambda.size(); ++j)
        d2 += std::norm(c.lambda[j] - kept.lambda[j]);
      if (std::sqrt(d2) < 1e-6) { dup = true; break; }
    }
    if (!dup) out.push_back(std::move(c));
  }
  return out;
}

MisiurewiczCertificate transversality_rescue(const Family& fam,
                                             const Slice& slice,
                                             const MisiurewiczCertificate& cert,
                                             int budget, uint64_t seed,
                                             const MisiurewiczOptions& opts) {
  if (cert.transversal) return cert;

  // identical constraints give identical rows: degenerate for every seed
  const int k = static_cast<int>(cert.constraints.size());
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const auto &a = cert.constraints[i], &b = cert.constraints[j];
      if (a.crit_index == b.crit_index && a.preperiod == b.preperiod &&
          a.period == b.period)
        fail(Errc::RescueExhausted,
             "duplicated constraint rows are degenerate for every seed");
    }

  MisiurewiczOptions ropts = opts;
  ropts.require_transversal = true;
  Rng rng = Rng::keyed(seed, 0);
  double radius = 1e-3;
  for (int b = 0; b < budget; ++b) {
    std::vector<cplx> t0(cert.t);
    for (auto& tj : t0) tj += rng.in_disk(radius);
    try {
      return solve_misiurewicz(fam, slice, cert.constraints, t0, ropts);
    } catch (const Error&) {
      radius = std::min(radius * 1.25, 0.25);
    }
  }
  fail(Errc::RescueExhausted,
       "no transverse representative found within the budget");
}

}  // namespace biflab
