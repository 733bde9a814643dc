#include "renorm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "newton.hpp"
#include "orbit.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace biflab {

namespace {

// --- model (z^2 + zeta) helpers --------------------------------------------

Poly model_poly(cplx zeta) { return Poly({zeta, cplx(0.0, 0.0), cplx(1.0, 0.0)}); }

std::vector<cplx> model_orbit(cplx zeta, int n) {
  std::vector<cplx> orb{cplx(0.0, 0.0)};
  for (int k = 0; k < n; ++k) {
    cplx z = orb.back();
    orb.push_back(z * z + zeta);
    if (!std::isfinite(std::abs(orb.back()))) break;
  }
  return orb;
}

// smallest q <= qmax with f_zeta^q(0) ~ 0, or 0
int model_center_period(cplx zeta, int qmax = 64, double tol = 1e-8) {
  std::vector<cplx> orb = model_orbit(zeta, qmax);
  for (int q = 1; q < static_cast<int>(orb.size()); ++q)
    if (std::abs(orb[q]) < tol) return q;
  return 0;
}

// smallest (m, p) with f_zeta^{m+p}(0) ~ f_zeta^m(0), or {0, 0}
std::pair<int, int> model_collision(cplx zeta, int mmax = 12, int pmax = 12,
                                    double tol = 1e-8) {
  std::vector<cplx> orb = model_orbit(zeta, mmax + pmax);
  for (int m = 1; m <= mmax; ++m)
    for (int p = 1; p <= pmax; ++p) {
      if (m + p >= static_cast<int>(orb.size())) continue;
      if (std::abs(orb[m + p] - orb[m]) < tol) return {m, p};
    }
  return {0, 0};
}

// Hyperbolic centers of exact period q found by Newton on the
// recurrence-evaluated orbit value f_zeta^q(0) (the coefficient-basis orbit
// polynomial is numerically hopeless past degree ~32) from a deterministic
// seed grid over the model disk.
std::vector<cplx> model_centers(int q) {
  std::vector<cplx> found;
  const int ng = 40;
  for (int iy = 0; iy < ng; ++iy)
    for (int ix = 0; ix < ng; ++ix) {
      cplx zeta(-2.0 + 4.0 * (ix + 0.5) / ng, -2.0 + 4.0 * (iy + 0.5) / ng);
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        cplx z(0.0, 0.0), d(0.0, 0.0);
        for (int k = 0; k < q; ++k) {
          d = 2.0 * z * d + 1.0;
          z = z * z + zeta;
        }
        if (std::abs(z) < 1e-12) {
          ok = true;
          break;
        }
        if (!std::isfinite(std::abs(z)) || std::abs(d) < 1e-300) break;
        cplx step = z / d;
        if (std::abs(step) > 0.5) step *= 0.5 / std::abs(step);
        zeta -= step;
        if (std::abs(zeta) > 3.0) break;
      }
      if (!ok || std::abs(zeta) > 2.0) continue;
      if (model_center_period(zeta, q) != q) continue;
      bool dup = false;
      for (cplx w : found)
        if (std::abs(w - zeta) < 1e-9) {
          dup = true;
          break;
        }
      if (!dup) found.push_back(zeta);
    }
  return found;
}

// orbit polynomial of the model critical point: coefficients in zeta
Poly model_orbit_poly(int q) {
  Poly z;  // zero
  Poly zeta({cplx(0.0, 0.0), cplx(1.0, 0.0)});
  for (int k = 0; k < q; ++k) {
    Poly sq = poly_mul(z, z);
    sq.c.resize(std::max(sq.c.size(), zeta.c.size()), cplx(0.0, 0.0));
    for (size_t i = 0; i < zeta.c.size(); ++i) sq.c[i] += zeta.c[i];
    sq.trim();
    z = sq;
  }
  return z;
}

// --- family-side Newton on f^n(c_i) = c_i along a 1-d slice -----------------

struct CenterSolveResult {
  cplx t;
  double residual;
  bool converged;
};

CenterSolveResult newton_center(const Family& fam, const Slice& slice,
                                int crit_index, int n, cplx t0) {
  Eigen::VectorXcd x(1);
  x(0) = t0;
  auto system = [&](const Eigen::VectorXcd& xx, Eigen::VectorXcd& F,
                    Eigen::MatrixXcd& J) {
    std::vector<cplx> tv{xx(0)};
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
    s.z = fam.marked_point(crit_index, lam);
    cplx dc = fam.marked_point_dir(crit_index, lam, tangents[0]);
    s.add_channel(0, dc);
    for (int k = 0; k < n; ++k) jet_step(m, s);
    F(0) = s.z - fam.marked_point(crit_index, lam);
    J(0, 0) = s.d[0] - dc;
  };
  NewtonOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 80;
  NewtonResult nr = newton_solve(x, system, opts);
  // near ill-conditioned parameters the rounding floor of f^n(c) - c can sit
  // above the nominal tolerance; a stalled iterate with a tiny residual is
  // still a usable center anchor
  bool ok = nr.converged || nr.residual < 1e-9;
  return {x(0), nr.residual, ok};
}

// minimal k with f^k(c_i) ~ c_i at the resolved parameter, or 0
int minimal_return_time(const Family& fam, std::span<const cplx> lambda,
                        int crit_index, int nmax, double tol = 1e-7) {
  Poly P = fam.instantiate(lambda);
  cplx c = fam.marked_point(crit_index, lambda);
  cplx z = c;
  for (int k = 1; k <= nmax; ++k) {
    z = P(z);
    if (std::abs(z - c) < tol) return k;
  }
  return 0;
}

double lambda_distance(std::span<const cplx> a, std::span<const cplx> b) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d2 += std::norm(a[i] - b[i]);
  return std::sqrt(d2);
}

struct LinFit {
  double slope, intercept, r2, slope_se;
};

LinFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  f.slope_se = n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace

// --------------------------------------------------------------- RenormWindow

std::vector<cplx> RenormWindow::chart_lambda(cplx zeta) const {
  std::vector<cplx> tv{chart_t(zeta)};
  return slice_point(family, slice, tv);
}

cplx RenormWindow::return_map(cplx zeta, cplx z) const {
  std::vector<cplx> lam = chart_lambda(zeta);
  Poly P = family.instantiate(lam);
  cplx c = family.marked_point(crit_index, lam);
  cplx w = c + beta * z;
  for (int k = 0; k < n1; ++k) w = P(w);
  return (w - c) / beta;
}

RenormWindow model_window() {
  RenormWindow w;
  w.family = Family::quadratic();
  w.slice = Slice::full(1);
  w.crit_index = 0;
  w.n1 = 1;
  w.t_center = cplx(0.0, 0.0);
  w.scale = cplx(1.0, 0.0);
  w.beta = cplx(1.0, 0.0);
  w.h_sup = 0.0;
  w.epsilon_ok = true;
  return w;
}

RenormWindow find_renorm_window(const Family& fam,
                                const MisiurewiczCertificate& cert,
                                int crit_index, const Slice& slice,
                                const RenormSearchConfig& cfg) {
  if (slice.dim() != 1)
    fail(Errc::Validation, "renorm windows live on 1-d slices");
  int p = 0;
  for (const auto& c : cert.constraints)
    if (c.crit_index == crit_index) p = c.period;
  if (p == 0)
    fail(Errc::Validation,
         "certificate carries no constraint for this critical point");

  RenormWindow w;
  w.family = fam;
  w.slice = slice;
  w.crit_index = crit_index;
  w.R = cfg.R;
  w.R_param = cfg.R_param;
  w.delta_emp = cfg.delta_emp;

  // anchor (a): smallest return time with a superattracting center in range;
  // a fan of Newton seeds around t_seed, keeping the center nearest to it
  bool found = false;
  const double seed_mags[] = {0.0,  2e-3, 5e-3, 1e-2, 2e-2,
                              5e-2, 0.1,  0.2,  0.4};
  for (int mult = 1; mult <= cfg.max_return_multiple && !found; ++mult) {
    int n1 = p * mult;
    double best = 1e300;
    for (double mag : seed_mags) {
      if (mag > 2.0 * cfg.search_radius && mag > 0.0) break;
      for (int dir = 0; dir < (mag == 0.0 ? 1 : 8); ++dir) {
        cplx seed = cfg.t_seed + std::polar(mag, kPi * dir / 4.0);
        CenterSolveResult r =
            newton_center(fam, slice, crit_index, n1, seed);
        if (!r.converged) continue;
        double dist = std::abs(r.t - cfg.t_seed);
        if (dist > cfg.search_radius || dist >= best) continue;
        std::vector<cplx> tv{r.t};
        std::vector<cplx> lam = slice_point(fam, slice, tv);
        if (minimal_return_time(fam, lam, crit_index, n1) != n1) continue;
        best = dist;
        w.n1 = n1;
        w.t_center = r.t;
        found = true;
      }
    }
  }
  if (!found)
    fail(Errc::NoCenterFound,
         "no superattracting center of return time p..8p within the search "
         "radius");

  // anchor (b): the period-doubled center next to the anchor
  found = false;
  const double mags[] = {1e-4, 5e-4, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const cplx dirs8[] = {{-1, 0}, {1, 0}, {0, 1}, {0, -1},
                        {inv_sqrt2, inv_sqrt2}, {-inv_sqrt2, inv_sqrt2},
                        {inv_sqrt2, -inv_sqrt2}, {-inv_sqrt2, -inv_sqrt2}};
  for (double mag : mags) {
    for (cplx u : dirs8) {
      CenterSolveResult r = newton_center(fam, slice, crit_index, 2 * w.n1,
                                          w.t_center + mag * u);
      if (!r.converged) continue;
      if (std::abs(r.t - w.t_center) < 1e-12) continue;  // fell back on (a)
      if (std::abs(r.t - w.t_center) > cfg.search_radius) continue;
      std::vector<cplx> tv{r.t};
      std::vector<cplx> lam = slice_point(fam, slice, tv);
      if (minimal_return_time(fam, lam, crit_index, 2 * w.n1) != 2 * w.n1)
        continue;
      w.scale = w.t_center - r.t;  // psi(-1) = t_center - scale
      found = true;
      break;
    }
    if (found) break;
  }
  if (!found)
    fail(Errc::NoCenterFound, "no period-doubled anchor near the center");
  if (std::abs(w.scale) < 1e-14)
    fail(Errc::ChartDegenerate, "chart scale below 1e-14");

  // dynamical rescaling from the second derivative of the return map
  {
    std::vector<cplx> tv{w.t_center};
    std::vector<cplx> lam = slice_point(fam, slice, tv);
    Poly P = fam.instantiate(lam);
    Poly dP = P.derivative();
    Poly d2P = dP.derivative();
    cplx c = fam.marked_point(crit_index, lam);
    SecondOrderJet j = iterate_second_order(P, dP, d2P, c, w.n1);
    if (std::abs(j.d2) < 1e-14)
      fail(Errc::ChartDegenerate, "degenerate quadratic normal form");
    w.beta = 2.0 / j.d2;
  }

  // empirical sup|h| over D(0,R)^2 in (z, zeta)
  {
    const int ns = std::max(cfg.h_samples, 4);
    std::vector<double> cell_max(static_cast<size_t>(ns) * ns, 0.0);
    parallel_for(static_cast<long>(ns) * ns, [&](long cell) {
      int iz = static_cast<int>(cell % ns), iy = static_cast<int>(cell / ns);
      cplx zeta(-cfg.R + 2.0 * cfg.R * (iz + 0.5) / ns,
                -cfg.R + 2.0 * cfg.R * (iy + 0.5) / ns);
      if (std::abs(zeta) > cfg.R) return;
      Poly P;
      cplx c;
      try {
        std::vector<cplx> lam = w.chart_lambda(zeta);
        P = w.family.instantiate(lam);
        c = w.family.marked_point(crit_index, lam);
      } catch (const Error&) {
        cell_max[cell] = 1e300;
        return;
      }
      double local = 0.0;
      for (int jz = 0; jz < ns; ++jz)
        for (int jy = 0; jy < ns; ++jy) {
          cplx z(-cfg.R + 2.0 * cfg.R * (jz + 0.5) / ns,
                 -cfg.R + 2.0 * cfg.R * (jy + 0.5) / ns);
          if (std::abs(z) > cfg.R) continue;
          cplx ww = c + w.beta * z;
          for (int k = 0; k < w.n1; ++k) ww = P(ww);
          cplx g = (ww - c) / w.beta;
          double h = std::abs(g - (z * z + zeta));
          if (!std::isfinite(h)) h = 1e300;
          local = std::max(local, h);
        }
      cell_max[cell] = local;
    });
    w.h_sup = *std::max_element(cell_max.begin(), cell_max.end());
    w.epsilon_ok = w.h_sup < cfg.delta_emp;
  }
  return w;
}

// ------------------------------------------------------------ baby Mandelbrot

BabyMandelbrot baby_mandelbrot(const RenormWindow& window, int resolution,
                               int max_iter) {
  if (resolution < 4 || max_iter < 1)
    fail(Errc::Validation, "resolution >= 4 and max_iter >= 1 required");
  BabyMandelbrot out;
  out.max_iter = max_iter;
  Box b{-window.R_param, window.R_param, -window.R_param, window.R_param};
  out.grid = GridField(b, resolution, resolution);
  parallel_for(static_cast<long>(resolution) * resolution, [&](long cell) {
    int ix = static_cast<int>(cell % resolution);
    int iy = static_cast<int>(cell / resolution);
    cplx zeta(out.grid.x_of(ix), out.grid.y_of(iy));
    if (std::abs(zeta) > window.R_param) return;
    Poly P;
    cplx c;
    try {
      std::vector<cplx> lam = window.chart_lambda(zeta);
      P = window.family.instantiate(lam);
      c = window.family.marked_point(window.crit_index, lam);
    } catch (const Error&) {
      return;
    }
    cplx w = c;  // rescaled z = 0
    bool member = true;
    for (int it = 0; it < max_iter && member; ++it) {
      for (int k = 0; k < window.n1; ++k) w = P(w);
      cplx g = (w - c) / window.beta;
      if (!std::isfinite(std::abs(g)) || std::abs(g) > window.R) member = false;
    }
    if (member) out.grid.at(ix, iy) = 1.0;
  });
  out.grid.meta = {{"kind", "baby_mandelbrot"},
                   {"max_iter", max_iter},
                   {"resolution", resolution},
                   {"R", window.R},
                   {"R_param", window.R_param}};
  return out;
}

// -------------------------------------------------------- straightening check

const char* straighten_mode_name(StraightenMode m) {
  switch (m) {
    case StraightenMode::Center: return "center";
    case StraightenMode::Multiplier: return "multiplier";
    case StraightenMode::Neutral: return "neutral";
  }
  return "?";
}

StraighteningDiagnostic straightening_check(const RenormWindow& window,
                                            cplx zeta, StraightenMode mode,
                                            int model_period, double theta) {
  if (std::abs(zeta) > window.R_param)
    fail(Errc::OutsideChart, "model parameter outside the chart disk");
  StraighteningDiagnostic d;
  d.mode = mode;
  d.zeta = zeta;
  const Family& fam = window.family;

  if (mode == StraightenMode::Center) {
    int q = model_period > 0 ? model_period : model_center_period(zeta);
    if (q == 0)
      fail(Errc::Validation, "model parameter is not a hyperbolic center");
    d.model_period = q;
    CenterSolveResult r = newton_center(fam, window.slice, window.crit_index,
                                        q * window.n1, window.chart_t(zeta));
    if (!r.converged) fail(Errc::PolishFailed, "center polish did not converge");
    d.t = r.t;
    std::vector<cplx> tv{r.t};
    d.lambda = slice_point(fam, window.slice, tv);
    Poly P = fam.instantiate(d.lambda);
    Poly dP = P.derivative();
    cplx c = fam.marked_point(window.crit_index, d.lambda);
    cplx z = c, m(1.0, 0.0);
    for (int k = 0; k < q * window.n1; ++k) {
      m *= dP(z);
      z = P(z);
    }
    d.multiplier = m;
    d.distance = lambda_distance(d.lambda, window.chart_lambda(zeta));
    d.pass = r.residual < 1e-9 && std::abs(m) < 1e-6;
    return d;
  }

  if (mode == StraightenMode::Multiplier) {
    // model attracting cycle at zeta
    Poly M = model_poly(zeta);
    std::vector<cplx> orb = model_orbit(zeta, 2000);
    if (orb.size() < 2000)
      fail(Errc::PolishFailed, "model orbit escapes: no attracting cycle");
    cplx tail = orb.back();
    int q = 0;
    for (int qq = 1; qq <= 64; ++qq) {
      if (std::abs(orb[orb.size() - 1 - qq] - tail) < 1e-7) { q = qq; break; }
    }
    if (q == 0) fail(Errc::PolishFailed, "no model attracting cycle detected");
    cplx w_model{};
    cplx zm = refine_periodic_point(M, tail, q, 1e-13, &w_model);
    (void)zm;
    if (std::abs(w_model) >= 1.0)
      fail(Errc::PolishFailed, "model cycle is not attracting");
    d.model_period = q;
    // family side at psi(zeta): follow the critical orbit into the basin
    d.t = window.chart_t(zeta);
    d.lambda = window.chart_lambda(zeta);
    Poly P = fam.instantiate(d.lambda);
    cplx z = fam.marked_point(window.crit_index, d.lambda);
    for (int k = 0; k < 2000 * window.n1; ++k) {
      z = P(z);
      if (!std::isfinite(std::abs(z)))
        fail(Errc::PolishFailed, "family orbit escapes at psi(zeta)");
    }
    cplx mult{};
    refine_periodic_point(P, z, q * window.n1, 1e-13, &mult);
    d.multiplier = mult;
    d.distance = std::abs(mult - w_model);
    d.pass = d.distance <= 1e-3;
    return d;
  }

  // neutral mode
  int q = model_period;
  if (q <= 0) fail(Errc::Validation, "neutral mode needs the model period");
  d.model_period = q;
  // model cycle point with multiplier nearest the target
  Poly M = model_poly(zeta);
  Poly Mq = M;
  for (int k = 1; k < q; ++k) Mq = poly_compose(M, Mq);
  Mq.c.resize(std::max<size_t>(Mq.c.size(), 2));
  Mq.c[1] -= cplx(1.0, 0.0);
  Mq.trim();
  std::vector<cplx> roots = aberth_roots(Mq);
  cplx target = unit_multiplier(theta);
  cplx zm = roots.empty() ? cplx(0.0, 0.0) : roots[0];
  double best = 1e300;
  for (cplx r : roots) {
    cplx m = cycle_multiplier(M, r, q);
    if (std::abs(m - target) < best) { best = std::abs(m - target); zm = r; }
  }
  std::vector<cplx> lam0 = window.chart_lambda(zeta);
  cplx c0 = fam.marked_point(window.crit_index, lam0);
  cplx z_seed = c0 + window.beta * zm;
  PerSolution sol;
  try {
    sol = solve_per(fam, window.slice, q * window.n1, target,
                    window.chart_t(zeta), z_seed);
  } catch (const Error& e) {
    fail(Errc::PolishFailed, std::string("neutral solve failed: ") + e.what());
  }
  d.t = sol.t[0];
  d.lambda = sol.lambda;
  d.multiplier = sol.cycle.multiplier;
  d.distance = lambda_distance(sol.lambda, lam0);
  d.pass = true;
  return d;
}

// --------------------------------------------------------- product embedding

namespace {

struct FactorTarget {
  std::string type;  // "center" or "misiurewicz"
  int steps_a = 0;   // f^{steps_a}(c) -
  int steps_b = -1;  // f^{steps_b}(c) (or c itself when -1)
  int land_period = 0;  // misiurewicz landing period (family steps)
};

FactorTarget classify_model_input(cplx zeta, int n1) {
  FactorTarget t;
  int q = model_center_period(zeta);
  if (q > 0) {
    t.type = "center";
    t.steps_a = q * n1;
    return t;
  }
  auto [m, p] = model_collision(zeta);
  if (m > 0) {
    t.type = "misiurewicz";
    t.steps_a = (m + p) * n1;
    t.steps_b = m * n1;
    t.land_period = p * n1;
    return t;
  }
  fail(Errc::Validation,
       "model input is neither a hyperbolic center nor a Misiurewicz model "
       "point");
}

// E_j(lambda) and its derivative along dir
std::pair<cplx, cplx> factor_equation(const Family& fam,
                                      std::span<const cplx> lambda,
                                      const std::vector<cplx>& dir,
                                      int crit_index, const FactorTarget& ft) {
  std::vector<std::vector<cplx>> dirs{dir};
  MapJet m = make_map_jet(fam, lambda, dirs);
  JetState s;
  s.z = fam.marked_point(crit_index, lambda);
  cplx dc = fam.marked_point_dir(crit_index, lambda, dir);
  s.add_channel(0, dc);
  cplx u = s.z, du = dc;
  for (int k = 0; k < ft.steps_a; ++k) {
    if (k == ft.steps_b) { u = s.z; du = s.d[0]; }
    jet_step(m, s);
  }
  if (ft.steps_b < 0) { /* u = c, du = dc already */ }
  return {s.z - u, s.d[0] - du};
}

// landing-cycle multiplier of the collision orbit at lambda (0 if the refine
// step fails, e.g. when the critical point itself is periodic)
cplx collision_multiplier(const Family& fam, std::span<const cplx> lambda,
                          int crit_index, const FactorTarget& ft) {
  Poly P = fam.instantiate(lambda);
  cplx c = fam.marked_point(crit_index, lambda);
  cplx z = c;
  for (int s = 0; s < ft.steps_b; ++s) z = P(z);
  cplx mult(0.0, 0.0);
  try {
    refine_periodic_point(P, z, ft.land_period, 1e-12, &mult);
  } catch (const Error&) {
    mult = cplx(0.0, 0.0);
  }
  return mult;
}

// Newton for a factor's collision equation restricted to the window's own
// slice (correctors hold the other critical point's certificate constraint)
std::pair<cplx, bool> refine_factor_on_slice(const Family& fam,
                                             const RenormWindow& w,
                                             const FactorTarget& ft, cplx t0) {
  cplx t = t0;
  for (int it = 0; it < 60; ++it) {
    std::vector<cplx> tv{t};
    std::vector<cplx> lam;
    std::vector<std::vector<cplx>> tangents;
    try {
      lam = slice_point(fam, w.slice, tv);
      tangents = slice_tangents(fam, w.slice, tv);
    } catch (const Error&) {
      return {t, false};
    }
    auto [e, de] = factor_equation(fam, lam, tangents[0], w.crit_index, ft);
    if (std::abs(e) < 1e-12) return {t, true};
    if (std::abs(de) < 1e-300 || !std::isfinite(std::abs(e)))
      return {t, false};
    t -= e / de;
    if (!std::isfinite(std::abs(t))) return {t, false};
  }
  return {t, false};
}

// The first-order chart misplaces Misiurewicz model inputs near the edge of
// the copy, and plain Newton from the chart guess can slide onto the window's
// own center (a spurious root of the collision equation).  Fan Newton seeds
// around the prediction and keep the nearest root whose landing cycle is
// repelling.
cplx misiurewicz_factor_start(const Family& fam, const RenormWindow& w,
                              const FactorTarget& ft, cplx zeta) {
  cplx t_pred = w.chart_t(zeta);
  double base_r = std::max(std::abs(zeta), 1.0) * std::abs(w.scale);
  const double rel_mags[] = {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
  cplx best = t_pred;
  double best_d = 1e300;
  for (double rm : rel_mags) {
    for (int dir = 0; dir < (rm == 0.0 ? 1 : 8); ++dir) {
      cplx seed = t_pred + std::polar(rm * base_r, kPi * dir / 4.0);
      auto [t, ok] = refine_factor_on_slice(fam, w, ft, seed);
      if (!ok) continue;
      double d = std::abs(t - t_pred);
      if (d >= best_d || d > 8.0 * base_r) continue;
      if (std::abs(t - w.t_center) < 10.0 * std::abs(w.scale) * 1e-6) continue;
      std::vector<cplx> tv{t};
      std::vector<cplx> lam;
      try {
        lam = slice_point(fam, w.slice, tv);
      } catch (const Error&) {
        continue;
      }
      if (std::abs(collision_multiplier(fam, lam, w.crit_index, ft)) <=
          1.0 + 1e-8)
        continue;
      best = t;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

ProductEmbeddingSample product_embedding_sample(
    const Family& fam, std::span<const RenormWindow> windows,
    std::span<const cplx> model_input, const EmbeddingConfig& cfg) {
  const int k = static_cast<int>(windows.size());
  if (k < 1 || static_cast<int>(model_input.size()) != k)
    fail(Errc::Validation, "one model input per window required");
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (windows[i].crit_index == windows[j].crit_index)
        fail(Errc::Validation, "windows must mark distinct critical points");

  std::vector<FactorTarget> targets;
  for (int j = 0; j < k; ++j)
    targets.push_back(classify_model_input(model_input[j], windows[j].n1));

  // start at the superposition of every window's chart offset from its slice
  // base (the windows share the certificate as base); alternation then moves
  // along each window's slice direction in the ambient parameter space.
  // Misiurewicz inputs get a slice-restricted per-factor refinement first.
  std::vector<cplx> lambda(windows[0].slice.base.begin(),
                           windows[0].slice.base.end());
  for (int j = 0; j < k; ++j) {
    cplx tj = targets[j].type == "misiurewicz"
                  ? misiurewicz_factor_start(fam, windows[j], targets[j],
                                             model_input[j])
                  : windows[j].chart_t(model_input[j]);
    std::vector<cplx> tv{tj};
    std::vector<cplx> pj = slice_point(fam, windows[j].slice, tv);
    for (size_t v = 0; v < lambda.size(); ++v)
      lambda[v] += pj[v] - windows[j].slice.base[v];
  }
  std::vector<std::vector<cplx>> dirs;
  for (int j = 0; j < k; ++j) {
    if (windows[j].slice.dim() != 1)
      fail(Errc::Validation, "embedding windows need 1-d slices");
    dirs.push_back(windows[j].slice.dirs[0]);
  }

  auto joint_residual = [&](std::span<const cplx> lam) {
    double r = 0.0;
    for (int j = 0; j < k; ++j) {
      auto [e, de] = factor_equation(fam, lam, dirs[j],
                                     windows[j].crit_index, targets[j]);
      (void)de;
      r = std::max(r, std::abs(e));
    }
    return r;
  };

  auto run = [&](std::span<const int> order,
                 std::vector<cplx> lam) -> std::pair<bool, std::vector<cplx>> {
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      for (int jj = 0; jj < k; ++jj) {
        int j = order[jj];
        // 1-d Newton in s along dirs[j]
        cplx s(0.0, 0.0);
        for (int it = 0; it < 50; ++it) {
          std::vector<cplx> lam_s = lam;
          for (size_t v = 0; v < lam_s.size(); ++v) lam_s[v] += s * dirs[j][v];
          cplx e, de;
          try {
            std::tie(e, de) = factor_equation(fam, lam_s, dirs[j],
                                              windows[j].crit_index,
                                              targets[j]);
          } catch (const Error&) {
            return {false, lam};
          }
          if (std::abs(e) < 1e-13) break;
          if (std::abs(de) < 1e-300 || !std::isfinite(std::abs(e)))
            return {false, lam};
          // trust region of a few chart widths: a full Newton step from a
          // mediocre start can exit the tube and land on a spurious root
          // (any superattracting center satisfies the collision equation)
          cplx ds = -e / de;
          double cap = 2.0 * std::abs(windows[j].scale);
          if (std::abs(ds) > cap) ds *= cap / std::abs(ds);
          s += ds;
          if (!std::isfinite(std::abs(s)) || std::abs(s) > 10.0)
            return {false, lam};
        }
        for (size_t v = 0; v < lam.size(); ++v) lam[v] += s * dirs[j][v];
      }
      if (joint_residual(lam) <= cfg.tol) return {true, lam};
    }
    return {false, lam};
  };

  std::vector<int> order(k);
  for (int j = 0; j < k; ++j) order[j] = j;
  auto [ok, lam_out] = run(order, lambda);
  if (!ok) {
    Rng rng = Rng::keyed(cfg.retry_seed, 0);
    for (int j = k - 1; j > 0; --j)
      std::swap(order[j], order[rng.below(j + 1)]);
    std::tie(ok, lam_out) = run(order, lambda);
  }
  if (!ok)
    fail(Errc::AlternationDiverged,
         "alternating projection did not reach the joint residual target");

  ProductEmbeddingSample out;
  out.model_input.assign(model_input.begin(), model_input.end());
  out.lambda = lam_out;
  out.residual = joint_residual(lam_out);

  Poly P = fam.instantiate(out.lambda);
  Poly dP = P.derivative();
  for (int j = 0; j < k; ++j) {
    FactorDiagnostic fd;
    fd.factor = j;
    fd.type = targets[j].type;
    cplx c = fam.marked_point(windows[j].crit_index, out.lambda);
    if (targets[j].type == "center") {
      cplx z = c, m(1.0, 0.0);
      for (int s = 0; s < targets[j].steps_a; ++s) {
        m *= dP(z);
        z = P(z);
      }
      fd.multiplier = m;
      fd.pass = std::abs(m) < 1e-6 && std::abs(z - c) < 1e-8;
    } else {
      cplx z = c;
      for (int s = 0; s < targets[j].steps_b; ++s) z = P(z);
      cplx mult{};
      try {
        refine_periodic_point(P, z, targets[j].land_period, 1e-12, &mult);
      } catch (const Error&) {
        mult = cplx(0.0, 0.0);
      }
      fd.multiplier = mult;
      fd.pass = std::abs(mult) > 1.0 + 1e-8;
    }
    if (!fd.pass)
      fail(Errc::FactorDiagnosticFailed,
           "factor " + std::to_string(j) + " diagnostic failed");
    out.diagnostics.push_back(fd);
  }
  return out;
}

double embedding_joint_residual(const Family& fam,
                                std::span<const RenormWindow> windows,
                                std::span<const cplx> model_input,
                                std::span<const cplx> lambda) {
  double r = 0.0;
  std::vector<cplx> lam(lambda.begin(), lambda.end());
  for (size_t j = 0; j < windows.size(); ++j) {
    FactorTarget ft = classify_model_input(model_input[j], windows[j].n1);
    auto [e, de] = factor_equation(fam, lam, windows[j].slice.dirs[0],
                                   windows[j].crit_index, ft);
    (void)de;
    r = std::max(r, std::abs(e));
  }
  return r;
}

// ----------------------------------------------------------------- dimension

BoxDimEstimate boxdim(const GridField& bitmap, int min_scales) {
  const int nx = bitmap.nx, ny = bitmap.ny;
  BoxDimEstimate est;
  for (int b = 1; b <= std::min(nx, ny) / 4; b *= 2) {
    long count = 0;
    for (int by = 0; by < (ny + b - 1) / b; ++by)
      for (int bx = 0; bx < (nx + b - 1) / b; ++bx) {
        bool hit = false;
        for (int iy = by * b; iy < std::min(ny, (by + 1) * b) && !hit; ++iy)
          for (int ix = bx * b; ix < std::min(nx, (bx + 1) * b) && !hit; ++ix)
            if (bitmap.at(ix, iy) > 0.5) hit = true;
        if (hit) ++count;
      }
    if (count == 0) continue;
    est.log_inv_eps.push_back(-std::log(static_cast<double>(b)));
    est.log_count.push_back(std::log(static_cast<double>(count)));
  }
  if (static_cast<int>(est.log_inv_eps.size()) < min_scales)
    fail(Errc::InsufficientScales,
         "fewer than " + std::to_string(min_scales) + " usable dyadic scales");
  LinFit f = linear_fit(est.log_inv_eps, est.log_count);
  est.dimension = f.slope;
  est.r2 = f.r2;
  return est;
}

HolderEstimate holder_exponent_probe(
    std::span<const std::pair<double, double>> pairs) {
  std::vector<double> x, y;
  for (const auto& [dm, dp] : pairs)
    if (dm > 0.0 && dp > 0.0) {
      x.push_back(std::log(dm));
      y.push_back(std::log(dp));
    }
  if (x.size() < 50)
    fail(Errc::InsufficientSpread, "need at least 50 positive-distance pairs");
  auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mx - *mn < 2.0 * std::log(10.0))
    fail(Errc::InsufficientSpread,
         "model distances span fewer than 2 decades");
  LinFit f = linear_fit(x, y);
  HolderEstimate est;
  est.exponent = f.slope;
  est.ci_halfwidth = 1.96 * f.slope_se;
  est.r2 = f.r2;
  est.n_pairs = static_cast<int>(x.size());
  return est;
}

std::vector<std::pair<double, double>> embedding_distance_samples(
    const RenormWindow& window, int max_period) {
  struct Matched {
    cplx zeta;
    cplx t;
    double pred_err;
    std::vector<cplx> lambda;
  };
  std::vector<Matched> pts;
  for (int q = 1; q <= max_period; ++q) {
    for (cplx zeta : model_centers(q)) {
      bool dup = false;
      for (const auto& m : pts)
        if (std::abs(m.zeta - zeta) < 1e-9) { dup = true; break; }
      if (dup) continue;
      CenterSolveResult r =
          newton_center(window.family, window.slice, window.crit_index,
                        q * window.n1, window.chart_t(zeta));
      if (!r.converged) continue;
      if (std::abs(r.t - window.chart_t(zeta)) > std::abs(window.scale))
        continue;  // escaped the window
      std::vector<cplx> tv{r.t};
      std::vector<cplx> lam = slice_point(window.family, window.slice, tv);
      // Newton can slide onto a lower-period center (e.g. the window's own
      // anchor); a wrong match would pair unrelated distances
      if (minimal_return_time(window.family, lam, window.crit_index,
                              q * window.n1) != q * window.n1)
        continue;
      // two model centers can converge onto one window center near the chart
      // edge; keep the match with the smaller prediction error
      double pe = std::abs(r.t - window.chart_t(zeta));
      bool taken = false;
      for (auto& m : pts)
        if (std::abs(m.t - r.t) < 1e-10) {
          taken = true;
          if (pe < m.pred_err) m = {zeta, r.t, pe, lam};
          break;
        }
      if (!taken) pts.push_back({zeta, r.t, pe, std::move(lam)});
    }
  }
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      out.emplace_back(std::abs(pts[i].zeta - pts[j].zeta),
                       lambda_distance(pts[i].lambda, pts[j].lambda));
      if (out.size() >= 5000) return out;
    }
  return out;
}

}  // namespace biflab
