#pragma once

#include <optional>
#include <span>
#include <vector>

#include "family.hpp"
#include "types.hpp"

namespace biflab {

enum class CycleClass { Superattracting, Attracting, Neutral, Repelling };

const char* cycle_class_name(CycleClass c);

struct Cycle {
  std::vector<cplx> points;  // length = exact period
  cplx multiplier;
  CycleClass classification = CycleClass::Repelling;
  double theta = 0.0;  // rotation number proxy arg(m)/2pi, Neutral only
  int multiplicity = 1;
  double residual = 0.0;

  int period() const { return static_cast<int>(points.size()); }
};

CycleClass classify_multiplier(cplx m, double tol = 1e-8);

struct CycleTolerances {
  double tol_cycle = 1e-9;   // orbit closure residual
  double cluster = 1e-6;     // root clustering radius (multiplicity)
  double tol_sep = 1e-6;     // cycle distinctness
};

/// All cycles of f_lambda whose period divides n, with exact periods and
/// multiplicities (clustered degenerate roots). Root count with multiplicity
/// is d^n. Throws PeriodTooLarge when d^n > 4096.
std::vector<Cycle> periodic_points_all(const Family& fam,
                                       std::span<const cplx> lambda, int n,
                                       const CycleTolerances& tol = {});

/// Exact-period-n cycles only.
std::vector<Cycle> periodic_points(const Family& fam,
                                   std::span<const cplx> lambda, int n,
                                   const CycleTolerances& tol = {});

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 200;
  int max_backtracks = 40;
  bool require_exact_period = true;
};

struct PerSolution {
  std::vector<cplx> t;       // slice coordinates
  std::vector<cplx> lambda;  // resolved parameter point
  Cycle cycle;
  double residual = 0.0;
};

/// Newton on (f^n(z) - z, (f^n)'(z) - w) along a 1d slice. w = 1 is outside
/// the contract (parabolic ambiguity) and rejected.
PerSolution solve_per(const Family& fam, const Slice& slice, int n, cplx w,
                      cplx t_seed, cplx z_seed, const SolveOptions& opts = {});

struct ContinuationPoint {
  double theta;
  PerSolution solution;
};

struct ContinuationResult {
  std::vector<ContinuationPoint> path;
  bool completed = false;
};

/// Predictor--corrector continuation of Per_n(e^{2 i pi theta}) along a theta
/// path, step-halving on corrector failure. Partial paths are returned with
/// completed = false (ContinuationStalled at the CLI surface).
ContinuationResult continue_per(const Family& fam, const Slice& slice, int n,
                                double theta_a, double theta_b, int steps,
                                cplx t_seed, cplx z_seed,
                                const SolveOptions& opts = {});

struct NeutralTargetSpec {
  std::vector<int> periods;    // N_k
  std::vector<double> thetas;  // each in (0,1) mod 1, never integral

  int k() const { return static_cast<int>(periods.size()); }
  void validate() const;
};

struct NeutralSolution {
  std::vector<cplx> t;
  std::vector<cplx> lambda;
  std::vector<Cycle> cycles;
  double residual = 0.0;
  int jacobian_rank = 0;
  double min_cycle_separation = 0.0;
};

struct NeutralOptions {
  SolveOptions solve;
  double tol_sep = 1e-6;
  double rank_rel_threshold = 1e-6;  // singular values above 1e-6 * sigma_max
  bool require_full_rank = true;     // throw RankDeficient when violated
};

/// Newton on the stacked periodicity + multiplier system: k cycles with
/// prescribed neutral multipliers inside a k-dimensional slice.
NeutralSolution solve_multi_neutral(const Family& fam, const Slice& slice,
                                    const NeutralTargetSpec& spec,
                                    std::span<const cplx> t_seed,
                                    std::span<const cplx> z_seed,
                                    const NeutralOptions& opts = {});

/// Effective tangent directions d lambda / d t_j of a (possibly corrected)
/// slice at coordinate t.
std::vector<std::vector<cplx>> slice_tangents(const Family& fam,
                                              const Slice& slice,
                                              std::span<const cplx> t);

}  // namespace biflab
