#pragma once

#include <span>
#include <vector>

#include "cycles.hpp"
#include "family.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace biflab {

/// One critical-orbit collision relation f^{m+p}(c_i) = f^m(c_i).
struct MisiurewiczConstraint {
  int crit_index = 0;
  int preperiod = 1;  // m >= 1
  int period = 1;     // p >= 1
};

struct MisiurewiczCertificate {
  std::vector<cplx> t;       // slice coordinates of the solution
  std::vector<cplx> lambda;  // resolved parameter point
  std::vector<MisiurewiczConstraint> constraints;  // minimal (m, p) labels
  std::vector<std::vector<cplx>> landing_cycles;   // one orbit per constraint
  std::vector<cplx> landing_multipliers;
  double residual = 0.0;
  std::vector<std::vector<cplx>> chi_jacobian;  // k x k, rows d chi_i / d t_l
  cplx transversality_det{0.0, 0.0};            // det of the collision-map Jacobian
  bool transversal = false;
  int rank = 0;
};

struct MisiurewiczOptions {
  double tol = 1e-12;
  int max_iter = 200;
  int max_backtracks = 40;
  double repelling_margin = 1e-8;   // require |mult| > 1 + margin
  double det_rel_threshold = 1e-8;  // |det| > threshold * row-norm product
  bool require_transversal = true;  // throw DegenerateJacobian when violated
};

/// Newton on the stacked collision map G(t) = (f^{m_i+p_i}(c_i) -
/// f^{m_i}(c_i))_i over a k-dimensional slice, followed by landing-cycle
/// refinement, repelling check, and the transversality certificate.
MisiurewiczCertificate solve_misiurewicz(
    const Family& fam, const Slice& slice,
    std::span<const MisiurewiczConstraint> constraints,
    std::span<const cplx> t_seed, const MisiurewiczOptions& opts = {});

/// Multi-start sweep over constraint shapes (preperiods <= max_preperiod,
/// periods <= max_period, distinct critical indices) and random seeds inside
/// the per-coordinate windows. Deduplicated (parameter distance 1e-6) and
/// sorted by residual. Deterministic for a fixed seed.
std::vector<MisiurewiczCertificate> multi_misiurewicz_sweep(
    const Family& fam, const Slice& slice, std::span<const Box> windows, int k,
    int max_preperiod, int max_period, int n_seeds, uint64_t seed,
    const MisiurewiczOptions& opts = {});

/// Re-seeding near a degenerate (converged, rank-deficient) solution to find
/// a transverse representative nearby. Transverse inputs pass through.
MisiurewiczCertificate transversality_rescue(const Family& fam,
                                             const Slice& slice,
                                             const MisiurewiczCertificate& cert,
                                             int budget, uint64_t seed,
                                             const MisiurewiczOptions& opts = {});

}  // namespace biflab
