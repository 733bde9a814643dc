#pragma once

#include <span>
#include <vector>

#include "family.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace biflab {

/// A complex affine line in parameter space: lambda(u) = base + u * dir.
/// Carrier for every 2-real-dimensional chart window.
struct Chart {
  std::vector<cplx> base;
  std::vector<cplx> dir;

  std::vector<cplx> at(cplx u) const {
    std::vector<cplx> lam = base;
    for (size_t v = 0; v < lam.size(); ++v) lam[v] += u * dir[v];
    return lam;
  }
  static Chart line(std::vector<cplx> base, std::vector<cplx> dir) {
    return Chart{std::move(base), std::move(dir)};
  }
};

enum class Activity { Active, Passive, Undecided };

struct ActivityVerdict {
  Activity status = Activity::Undecided;
  double evidence = 0.0;  // score backing the verdict
  double radius = 0.0;
  int escaped = 0, bounded = 0;  // sampled orbit split
  double max_param_derivative = 0.0;
};

struct ActivityConfig {
  int depth = 200;
  int ring_samples = 24;  // per ring, 4 rings plus the center
  double derivative_active = 1e8;
  double derivative_passive = 1e3;
};

/// Montel-style dichotomy probe on a parameter disk: Active when escaping and
/// bounded critical orbits coexist (or the parameter derivative blows up),
/// Passive when the whole disk is uniformly bounded with tame derivatives or
/// uniformly escaping, Undecided otherwise.
ActivityVerdict activity_test(const Family& fam, int crit_index,
                              const Chart& chart, cplx center, double radius,
                              const ActivityConfig& cfg = {});

struct BifDensityConfig {
  int depth = 200;
  int threads = 0;
};

/// Potential grid g_i(lambda) = G(c_i(lambda)) over a chart window.
GridField potential_field(const Family& fam, int crit_index, const Chart& chart,
                          Box window, int nx, int ny,
                          const BifDensityConfig& cfg = {});

/// Discrete Laplacian (5-point) of the critical potential, clamped at zero;
/// negativity beyond eps_neg = 1e-6 * max is counted in meta.neg_warnings.
GridField bif_density(const Family& fam, int crit_index, const Chart& chart,
                      Box window, int nx, int ny,
                      const BifDensityConfig& cfg = {});

/// Escape-time membership bitmap of the critical orbit (1 = bounded).
GridField escape_membership(const Family& fam, int crit_index,
                            const Chart& chart, Box window, int nx, int ny,
                            int max_iter, int threads = 0);

// ---------------------------------------------------------------- 4d wedge

/// Product sampling of a 2-complex-dimensional chart window:
/// lambda(u1, u2) = base + u1 dir1 + u2 dir2, each complex coordinate on its
/// own rectangle.
struct ProductChart {
  std::vector<cplx> base;
  std::vector<cplx> dir1, dir2;
  Box box1, box2;
  int n1 = 0, n2 = 0;  // per-axis resolution (n1 x n1 x n2 x n2 samples)
};

/// Potential sampled over the full product grid, index order
/// ((i2y * n2 + i2x) * n1 + i1y) * n1 + i1x.
struct Grid4 {
  ProductChart chart;
  std::vector<double> values;
  size_t index(int i1x, int i1y, int i2x, int i2y) const {
    return ((static_cast<size_t>(i2y) * chart.n2 + i2x) * chart.n1 + i1y) *
               chart.n1 +
           i1x;
  }
  double h1x() const { return chart.box1.width() / chart.n1; }
  double h1y() const { return chart.box1.height() / chart.n1; }
  double h2x() const { return chart.box2.width() / chart.n2; }
  double h2y() const { return chart.box2.height() / chart.n2; }
  bool same_sampling(const Grid4& o) const;
};

Grid4 potential_field4(const Family& fam, int crit_index,
                       const ProductChart& chart, int depth, int threads = 0);

/// Mixed Bedford--Taylor wedge density
///   u_{1 1b} v_{2 2b} + u_{2 2b} v_{1 1b} - 2 Re( u_{1 2b} conj(v_{1 2b}) )
/// with complex Hessian entries by central differences of `step` cells;
/// step > 1 measures the currents mollified at scale step*h, which is what
/// makes the self-wedge vanishing observable on a finite grid.
/// Clamped at zero; mass integrates the clamped density over the interior.
struct WedgeResult {
  double total_mass = 0.0;
  long clamp_warnings = 0;  // cells below -eps_neg
  Grid4 density;            // clamped, zero on the boundary shell
};

WedgeResult wedge_density(const Grid4& u, const Grid4& v, int threads = 0,
                          int step = 1, int presmooth = 0);

/// Same estimator with an explicit interior margin (cells skipped on every
/// side); wedge_density forwards here with margin = step + presmooth.
WedgeResult wedge_density_margin(const Grid4& u, const Grid4& v, int threads,
                                 int step, int margin);

/// Separable box filter of the given cell radius applied in place along all
/// four axes (clamped at the boundary; exclude a shell of the same width
/// from any subsequent mass integral).
void presmooth_grid(Grid4& g, int radius, int threads = 0);

/// Total signed wedge mass without materializing a density grid; needed at
/// resolutions where three full Grid4 allocations exceed memory.  When
/// presmooth > 0 the INPUTS ARE SMOOTHED IN PLACE (pass &u == &v for a
/// self-wedge so the field is smoothed once).
double wedge_total_mass(Grid4& u, Grid4& v, int threads = 0, int step = 1,
                        int presmooth = 0);

/// Mass on pre-smoothed fields: margin is the boundary shell (in cells) to
/// exclude, normally step + the presmooth radius already applied.
double wedge_total_mass_margin(const Grid4& u, const Grid4& v, int threads,
                               int step, int margin);

/// Mass of the clamped wedge density inside the 4d ball of given radius
/// around a chart coordinate (u1, u2); used for support localization checks.
double wedge_ball_mass(const WedgeResult& w, cplx u1, cplx u2, double radius);
double wedge_median_ball_mass(const WedgeResult& w, double radius);

}  // namespace biflab
