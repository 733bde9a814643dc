#include "currents.hpp"

#include <algorithm>
#include <cmath>

#include "orbit.hpp"
#include "parallel.hpp"
#include "potential.hpp"

namespace biflab {

ActivityVerdict activity_test(const Family& fam, int crit_index,
                              const Chart& chart, cplx center, double radius,
                              const ActivityConfig& cfg) {
  ActivityVerdict v;
  v.radius = radius;

  std::vector<cplx> probes{center};
  for (int ring = 1; ring <= 4; ++ring) {
    double r = radius * ring / 4.0;
    for (int k = 0; k < cfg.ring_samples; ++k) {
      double ang = 2.0 * kPi * k / cfg.ring_samples + 0.1 * ring;
      probes.push_back(center + std::polar(r, ang));
    }
  }

  std::vector<std::vector<cplx>> dirset{chart.dir};
  for (cplx u : probes) {
    std::vector<cplx> lam = chart.at(u);
    double R = fam.default_escape_radius(lam);
    MapJet m = make_map_jet(fam, lam, dirset);
    JetState s;
    s.z = fam.marked_point(crit_index, lam);
    s.add_channel(0, fam.marked_point_dir(crit_index, lam, chart.dir));
    bool escaped = false;
    for (int n = 0; n < cfg.depth; ++n) {
      if (std::abs(s.z) > R) {
        escaped = true;
        break;
      }
      jet_step(m, s);
      v.max_param_derivative =
          std::max(v.max_param_derivative, std::abs(s.d[0]));
      if (v.max_param_derivative > cfg.derivative_active) break;
      if (!std::isfinite(s.z.real()) || !std::isfinite(s.z.imag())) {
        escaped = true;
        break;
      }
    }
    escaped ? ++v.escaped : ++v.bounded;
    if (v.max_param_derivative > cfg.derivative_active) break;
  }

  const int total = static_cast<int>(probes.size());
  if (v.max_param_derivative > cfg.derivative_active) {
    v.status = Activity::Active;
    v.evidence = v.max_param_derivative;
  } else if (v.escaped > 0 && v.bounded > 0) {
    // Montel dichotomy witness
    v.status = Activity::Active;
    v.evidence =
        static_cast<double>(std::min(v.escaped, v.bounded)) / total;
  } else if (v.escaped == total) {
    v.status = Activity::Passive;  // the whole disk is normal at infinity
    v.evidence = 1.0;
  } else if (v.bounded == total &&
             v.max_param_derivative < cfg.derivative_passive) {
    v.status = Activity::Passive;
    v.evidence = 1.0;
  } else {
    v.status = Activity::Undecided;
    v.evidence = 0.0;
  }
  return v;
}

GridField potential_field(const Family& fam, int crit_index, const Chart& chart,
                          Box window, int nx, int ny,
                          const BifDensityConfig& cfg) {
  GridField g(window, nx, ny);
  parallel_for(
      static_cast<long>(nx) * ny,
      [&](long idx) {
        int ix = static_cast<int>(idx % nx);
        int iy = static_cast<int>(idx / nx);
        cplx u(g.x_of(ix), g.y_of(iy));
        std::vector<cplx> lam = chart.at(u);
        Poly p = fam.instantiate(lam);
        cplx c = fam.marked_point(crit_index, lam);
        g.at(ix, iy) =
            green_poly(p, c, cfg.depth, fam.default_escape_radius(lam)).value;
      },
      cfg.threads);
  g.meta = {{"kind", "critical_potential"},
            {"crit_index", crit_index},
            {"depth", cfg.depth},
            {"family", fam.to_json()}};
  return g;
}

GridField bif_density(const Family& fam, int crit_index, const Chart& chart,
                      Box window, int nx, int ny, const BifDensityConfig& cfg) {
  GridField pot = potential_field(fam, crit_index, chart, window, nx, ny, cfg);
  GridField out(window, nx, ny);
  const double hx2 = pot.cell_w() * pot.cell_w();
  const double hy2 = pot.cell_h() * pot.cell_h();
  double raw_max = 0.0;
  for (int iy = 1; iy + 1 < ny; ++iy)
    for (int ix = 1; ix + 1 < nx; ++ix) {
      double lap =
          (pot.at(ix + 1, iy) + pot.at(ix - 1, iy) - 2.0 * pot.at(ix, iy)) /
              hx2 +
          (pot.at(ix, iy + 1) + pot.at(ix, iy - 1) - 2.0 * pot.at(ix, iy)) /
              hy2;
      out.at(ix, iy) = lap;
      raw_max = std::max(raw_max, lap);
    }
  const double eps_neg = 1e-6 * raw_max;
  long warnings = 0;
  for (double& v : out.values) {
    if (v < -eps_neg) ++warnings;
    if (v < 0.0) v = 0.0;
  }
  out.meta = {{"kind", "bif_density"},
              {"crit_index", crit_index},
              {"depth", cfg.depth},
              {"neg_warnings", warnings},
              {"family", fam.to_json()}};
  return out;
}

GridField escape_membership(const Family& fam, int crit_index,
                            const Chart& chart, Box window, int nx, int ny,
                            int max_iter, int threads) {
  GridField g(window, nx, ny);
  parallel_for(
      static_cast<long>(nx) * ny,
      [&](long idx) {
        int ix = static_cast<int>(idx % nx);
        int iy = static_cast<int>(idx / nx);
        cplx u(g.x_of(ix), g.y_of(iy));
        std::vector<cplx> lam = chart.at(u);
        cplx c = fam.marked_point(crit_index, lam);
        Orbit orb = fam.iterate(lam, c, max_iter,
                                fam.default_escape_radius(lam));
        g.at(ix, iy) = orb.escaped ? 0.0 : 1.0;
      },
      threads);
  g.meta = {{"kind", "escape_membership"},
            {"crit_index", crit_index},
            {"max_iter", max_iter},
            {"family", fam.to_json()}};
  return g;
}

// ------------------------------------------------------------------ Grid4

bool Grid4::same_sampling(const Grid4& o) const {
  auto box_eq = [](const Box& a, const Box& b) {
    return a.x0 == b.x0 && a.x1 == b.x1 && a.y0 == b.y0 && a.y1 == b.y1;
  };
  return chart.n1 == o.chart.n1 && chart.n2 == o.chart.n2 &&
         box_eq(chart.box1, o.chart.box1) && box_eq(chart.box2, o.chart.box2) &&
         chart.base == o.chart.base && chart.dir1 == o.chart.dir1 &&
         chart.dir2 == o.chart.dir2;
}

Grid4 potential_field4(const Family& fam, int crit_index,
                       const ProductChart& chart, int depth, int threads) {
  if (chart.n1 < 5 || chart.n2 < 5)
    fail(Errc::Validation, "product grid resolution must be >= 5 per axis");
  Grid4 g;
  g.chart = chart;
  const int n1 = chart.n1, n2 = chart.n2;
  g.values.assign(static_cast<size_t>(n1) * n1 * n2 * n2, 0.0);
  const double h1x = g.h1x(), h1y = g.h1y(), h2x = g.h2x(), h2y = g.h2y();

  parallel_for(
      static_cast<long>(n2) * n2,
      [&](long outer) {
        int i2x = static_cast<int>(outer % n2);
        int i2y = static_cast<int>(outer / n2);
        cplx u2(chart.box2.x0 + (i2x + 0.5) * h2x,
                chart.box2.y0 + (i2y + 0.5) * h2y);
        for (int i1y = 0; i1y < n1; ++i1y)
          for (int i1x = 0; i1x < n1; ++i1x) {
            cplx u1(chart.box1.x0 + (i1x + 0.5) * h1x,
                    chart.box1.y0 + (i1y + 0.5) * h1y);
            std::vector<cplx> lam = chart.base;
            for (size_t v = 0; v < lam.size(); ++v)
              lam[v] += u1 * chart.dir1[v] + u2 * chart.dir2[v];
            Poly p = fam.instantiate(lam);
            cplx c = fam.marked_point(crit_index, lam);
            g.values[g.index(i1x, i1y, i2x, i2y)] =
                green_poly(p, c, depth, fam.default_escape_radius(lam)).value;
          }
      },
      threads);
  return g;
}

// separable box filter of the given cell radius along all four axes
// (clamped at the boundary), using running sums; this is the mollification
// that makes kink ridges C^1 at scale radius*h before differencing
void presmooth_grid(Grid4& g, int radius, int threads) {
  const int n1 = g.chart.n1, n2 = g.chart.n2;
  std::vector<double> tmp(g.values.size());
  auto line_pass = [&](int axis) {
    // iterate over all lines parallel to `axis`
    const int lens[4] = {n1, n1, n2, n2};
    const int len = lens[axis];
    long n_lines = static_cast<long>(g.values.size()) / len;
    parallel_for(
        n_lines,
        [&](long li) {
          int idx[4];
          long rest = li;
          for (int a = 0; a < 4; ++a) {
            if (a == axis) continue;
            idx[a] = static_cast<int>(rest % lens[a]);
            rest /= lens[a];
          }
          auto cell = [&](int v) {
            idx[axis] = v;
            return g.index(idx[0], idx[1], idx[2], idx[3]);
          };
          // clamped running-sum box filter
          double sum = 0.0;
          for (int v = -radius; v <= radius; ++v)
            sum += g.values[cell(std::clamp(v, 0, len - 1))];
          const double inv = 1.0 / (2 * radius + 1);
          for (int v = 0; v < len; ++v) {
            tmp[cell(v)] = sum * inv;
            sum -= g.values[cell(std::clamp(v - radius, 0, len - 1))];
            sum += g.values[cell(std::clamp(v + radius + 1, 0, len - 1))];
          }
        },
        threads);
    g.values.swap(tmp);
  };
  for (int a = 0; a < 4; ++a) line_pass(a);
}

WedgeResult wedge_density(const Grid4& u, const Grid4& v, int threads,
                          int step, int presmooth) {
  if (step < 1) fail(Errc::Validation, "wedge_density: step must be >= 1");
  if (presmooth < 0)
    fail(Errc::Validation, "wedge_density: presmooth must be >= 0");
  if (!u.same_sampling(v))
    fail(Errc::GridMismatch, "wedge_density: product grids differ");
  if (presmooth > 0) {
    // smooth, then difference; the boundary shell corrupted by the clamped
    // filter is excluded from the mass via the enlarged margin below
    Grid4 us = u, vs = v;
    presmooth_grid(us, presmooth, threads);
    if (&u != &v) presmooth_grid(vs, presmooth, threads);
    WedgeResult r = wedge_density_margin(us, (&u == &v) ? us : vs, threads,
                                         step, step + presmooth);
    return r;
  }
  return wedge_density_margin(u, v, threads, step, step);
}

namespace {

// complex Hessian entries at one interior node, central differences of
// spacing `step` cells
inline void wedge_hessians(const Grid4& g, int step, double h1x, double h1y,
                           double h2x, double h2y, int ax, int ay, int bx,
                           int by, double& q11, double& q22, cplx& q12) {
  auto val = [&](int dax, int day, int dbx, int dby) {
    return g.values[g.index(ax + dax * step, ay + day * step,
                            bx + dbx * step, by + dby * step)];
  };
  double center = val(0, 0, 0, 0);
  q11 = 0.25 * ((val(1, 0, 0, 0) + val(-1, 0, 0, 0) - 2 * center) / (h1x * h1x) +
                (val(0, 1, 0, 0) + val(0, -1, 0, 0) - 2 * center) / (h1y * h1y));
  q22 = 0.25 * ((val(0, 0, 1, 0) + val(0, 0, -1, 0) - 2 * center) / (h2x * h2x) +
                (val(0, 0, 0, 1) + val(0, 0, 0, -1) - 2 * center) / (h2y * h2y));
  double ux1x2 = (val(1, 0, 1, 0) - val(-1, 0, 1, 0) - val(1, 0, -1, 0) +
                  val(-1, 0, -1, 0)) /
                 (4 * h1x * h2x);
  double uy1y2 = (val(0, 1, 0, 1) - val(0, -1, 0, 1) - val(0, 1, 0, -1) +
                  val(0, -1, 0, -1)) /
                 (4 * h1y * h2y);
  double ux1y2 = (val(1, 0, 0, 1) - val(-1, 0, 0, 1) - val(1, 0, 0, -1) +
                  val(-1, 0, 0, -1)) /
                 (4 * h1x * h2y);
  double uy1x2 = (val(0, 1, 1, 0) - val(0, -1, 1, 0) - val(0, 1, -1, 0) +
                  val(0, -1, -1, 0)) /
                 (4 * h1y * h2x);
  q12 = 0.25 * cplx(ux1x2 + uy1y2, ux1y2 - uy1x2);
}

}  // namespace

WedgeResult wedge_density_margin(const Grid4& u, const Grid4& v, int threads,
                                 int step, int margin) {
  const int n1 = u.chart.n1, n2 = u.chart.n2;
  const double h1x = step * u.h1x(), h1y = step * u.h1y(),
               h2x = step * u.h2x(), h2y = step * u.h2y();

  WedgeResult out;
  out.density.chart = u.chart;
  out.density.values.assign(u.values.size(), 0.0);

  auto hessians = [&](const Grid4& g, int ax, int ay, int bx, int by,
                      double& q11, double& q22, cplx& q12) {
    wedge_hessians(g, step, h1x, h1y, h2x, h2y, ax, ay, bx, by, q11, q22, q12);
  };

  std::vector<double> raw(u.values.size(), 0.0);
  std::vector<long> warn_per_slab(static_cast<size_t>(n2) * n2, 0);
  parallel_for(
      static_cast<long>(n2) * n2,
      [&](long outer) {
        int bx = static_cast<int>(outer % n2);
        int by = static_cast<int>(outer / n2);
        if (bx < margin || bx + margin >= n2 || by < margin ||
            by + margin >= n2)
          return;
        for (int ay = margin; ay + margin < n1; ++ay)
          for (int ax = margin; ax + margin < n1; ++ax) {
            double u11, u22, v11, v22;
            cplx u12, v12;
            hessians(u, ax, ay, bx, by, u11, u22, u12);
            hessians(v, ax, ay, bx, by, v11, v22, v12);
            double dens = u11 * v22 + u22 * v11 -
                          2.0 * (u12 * std::conj(v12)).real();
            raw[u.index(ax, ay, bx, by)] = dens;
          }
      },
      threads);

  double raw_max = 0.0;
  for (double r : raw) raw_max = std::max(raw_max, r);
  const double eps_neg = 1e-6 * raw_max;
  // the density field is clamped for display/localization, but the total
  // mass integrates the signed values: discretization noise on a degenerate
  // (rank-one) Hessian is sign-symmetric and cancels, whereas the positive
  // part alone would keep half of it
  double mass = 0.0;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < -eps_neg) ++out.clamp_warnings;
    out.density.values[i] = std::max(0.0, raw[i]);
    mass += raw[i];
  }
  out.total_mass =
      mass * (h1x * h1y * h2x * h2y) / (static_cast<double>(step) * step *
                                        step * step);
  return out;
}

double wedge_total_mass(Grid4& u, Grid4& v, int threads, int step,
                        int presmooth) {
  if (step < 1) fail(Errc::Validation, "wedge_total_mass: step must be >= 1");
  if (presmooth < 0)
    fail(Errc::Validation, "wedge_total_mass: presmooth must be >= 0");
  if (!u.same_sampling(v))
    fail(Errc::GridMismatch, "wedge_total_mass: product grids differ");
  if (presmooth > 0) {
    presmooth_grid(u, presmooth, threads);
    if (&u != &v) presmooth_grid(v, presmooth, threads);
  }
  return wedge_total_mass_margin(u, v, threads, step, step + presmooth);
}

double wedge_total_mass_margin(const Grid4& u, const Grid4& v, int threads,
                               int step, int margin) {
  const int n1 = u.chart.n1, n2 = u.chart.n2;
  const double h1x = step * u.h1x(), h1y = step * u.h1y(),
               h2x = step * u.h2x(), h2y = step * u.h2y();
  std::vector<double> slab_mass(static_cast<size_t>(n2) * n2, 0.0);
  parallel_for(
      static_cast<long>(n2) * n2,
      [&](long outer) {
        int bx = static_cast<int>(outer % n2);
        int by = static_cast<int>(outer / n2);
        if (bx < margin || bx + margin >= n2 || by < margin ||
            by + margin >= n2)
          return;
        double acc = 0.0;
        for (int ay = margin; ay + margin < n1; ++ay)
          for (int ax = margin; ax + margin < n1; ++ax) {
            double u11, u22, v11, v22;
            cplx u12, v12;
            wedge_hessians(u, step, h1x, h1y, h2x, h2y, ax, ay, bx, by, u11,
                           u22, u12);
            wedge_hessians(v, step, h1x, h1y, h2x, h2y, ax, ay, bx, by, v11,
                           v22, v12);
            acc += u11 * v22 + u22 * v11 - 2.0 * (u12 * std::conj(v12)).real();
          }
        slab_mass[outer] = acc;
      },
      threads);
  double mass = 0.0;
  for (double m : slab_mass) mass += m;
  return mass * (h1x * h1y * h2x * h2y) /
         (static_cast<double>(step) * step * step * step);
}

double wedge_ball_mass(const WedgeResult& w, cplx u1, cplx u2, double radius) {
  const Grid4& g = w.density;
  const int n1 = g.chart.n1, n2 = g.chart.n2;
  const double h1x = g.h1x(), h1y = g.h1y(), h2x = g.h2x(), h2y = g.h2y();
  double mass = 0.0;
  double r2 = radius * radius;
  for (int by = 0; by < n2; ++by)
    for (int bx = 0; bx < n2; ++bx) {
      double dy2 = g.chart.box2.y0 + (by + 0.5) * h2y - u2.imag();
      double dx2 = g.chart.box2.x0 + (bx + 0.5) * h2x - u2.real();
      double d2 = dx2 * dx2 + dy2 * dy2;
      if (d2 > r2) continue;
      for (int ay = 0; ay < n1; ++ay)
        for (int ax = 0; ax < n1; ++ax) {
          double dy1 = g.chart.box1.y0 + (ay + 0.5) * h1y - u1.imag();
          double dx1 = g.chart.box1.x0 + (ax + 0.5) * h1x - u1.real();
          if (d2 + dx1 * dx1 + dy1 * dy1 > r2) continue;
          mass += g.values[g.index(ax, ay, bx, by)];
        }
    }
  return mass * h1x * h1y * h2x * h2y;
}

double wedge_median_ball_mass(const WedgeResult& w, double radius) {
  const Grid4& g = w.density;
  const int n1 = g.chart.n1, n2 = g.chart.n2;
  std::vector<double> masses;
  // probe a coarse lattice of ball centers
  for (int by = 1; by < 4; ++by)
    for (int bx = 1; bx < 4; ++bx)
      for (int ay = 1; ay < 4; ++ay)
        for (int ax = 1; ax < 4; ++ax) {
          cplx u1(g.chart.box1.x0 + ax * g.chart.box1.width() / 4.0,
                  g.chart.box1.y0 + ay * g.chart.box1.height() / 4.0);
          cplx u2(g.chart.box2.x0 + bx * g.chart.box2.width() / 4.0,
                  g.chart.box2.y0 + by * g.chart.box2.height() / 4.0);
          masses.push_back(wedge_ball_mass(w, u1, u2, radius));
        }
  (void)n1;
  (void)n2;
  std::sort(masses.begin(), masses.end());
  return masses[masses.size() / 2];
}

}  // namespace biflab
