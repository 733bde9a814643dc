#pragma once

#include <span>
#include <string>
#include <vector>

#include "currents.hpp"
#include "cycles.hpp"
#include "family.hpp"
#include "misiurewicz.hpp"
#include "types.hpp"

namespace biflab {

struct DensityTrial {
  double radius = 0.0;
  std::vector<cplx> start;  // ball center (slice coordinates)
  std::vector<cplx> found;  // empty on a miss
  double distance = 0.0;    // Euclidean, (c, a) chart
  double residual = 0.0;
  int rank = 0;
  bool hit = false;
  bool reverified = false;  // found parameter re-solved from scratch
  std::string detail;       // e.g. periods / constraint shape used
};

struct DensityExperimentReport {
  std::string name;
  int k = 0;
  std::vector<double> thetas;
  std::string family;
  std::vector<DensityTrial> trials;  // one per radius
  bool success = false;              // nonincreasing hit distances
  // success criterion is this lab's operationalization; the underlying
  // density statement carries no rate
  std::string criterion = "nonincreasing nearest-hit distance over radii";
};

struct DensityExperimentConfig {
  std::vector<double> radii{0.2, 0.1, 0.05, 0.02};
  int n_seeds = 256;  // solve attempts per radius
  uint64_t seed = 1;
};

/// From a rank-k Misiurewicz certificate, hunt NeutralSolutions for the
/// target multipliers in shrinking balls. Candidate period tuples are tried
/// round-robin across seeds (thetas are shared by all candidates).
DensityExperimentReport experiment_prerep_to_neutral(
    const Family& fam, const MisiurewiczCertificate& cert,
    std::span<const std::vector<int>> period_candidates,
    std::span<const double> thetas, const DensityExperimentConfig& cfg = {});

/// From a verified NeutralSolution, sweep for rank-k Misiurewicz certificates
/// in shrinking balls around it.
DensityExperimentReport experiment_neutral_to_prerep(
    const Family& fam, const NeutralSolution& neutral, int max_preperiod,
    int max_period, const DensityExperimentConfig& cfg = {});

struct StratificationReport {
  bool found = false;
  cplx ball_center{0.0, 0.0};  // chart coordinate
  double ball_radius = 0.0;
  int active_index = -1;   // the critical point active in the ball
  int passive_index = -1;  // the one passive there
  double active_mass = 0.0;
  double passive_mass = 0.0;
  // scanned evidence
  int cells_scanned = 0;
  int cells_active_both = 0, cells_passive_both = 0, cells_mixed = 0,
      cells_undecided = 0;
};

struct StratificationConfig {
  int resolution = 16;      // activity scan grid per axis
  int density_res = 48;     // bif_density resolution on the qualifying ball
  double mass_ratio = 1e-2; // passive mass must be below ratio * active mass
  int depth = 200;
};

/// Probe for a ball where exactly one critical point is active and the
/// other's bifurcation density vanishes: a piece of
/// supp(T_bif) \ supp(T_bif^2) for a cubic family.
StratificationReport experiment_stratification(
    const Family& fam, const Chart& chart, Box window,
    const StratificationConfig& cfg = {});

}  // namespace biflab
