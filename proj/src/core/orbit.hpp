#pragma once

#include <span>
#include <vector>

#include "family.hpp"
#include "poly.hpp"
#include "types.hpp"

namespace biflab {

/// The family instantiated at one parameter point together with the closed
/// form derivative data needed for first variations along a direction set:
/// P, P', P'' in z and, per direction, the coefficient-derivative polynomial
/// Pt and its z-derivative.
struct MapJet {
  Poly P, dP, d2P;
  std::vector<Poly> Pt, dPt;
};

MapJet make_map_jet(const Family& fam, std::span<const cplx> lambda,
                    std::span<const std::vector<cplx>> dirs);

/// Orbit state with first-variation channels. Channel j tracks dz/du_j where
/// u_j is either the initial condition (dir_index = -1) or the parameter
/// coordinate along MapJet direction dir_index.
struct JetState {
  cplx z;
  std::vector<cplx> d;
  std::vector<int> dir_index;

  void add_channel(int dir, cplx seed) {
    d.push_back(seed);
    dir_index.push_back(dir);
  }
};

/// One iteration step z -> P(z), propagating all channels.
void jet_step(const MapJet& m, JetState& s);

/// Product of P' along the orbit (cycle multiplier when z is periodic) with
/// its variations along the same channels as the orbit state.
struct MultiplierJet {
  cplx M{1.0, 0.0};
  std::vector<cplx> dM;
};

/// Advance orbit and multiplier jets together by one step.
void jet_step_with_multiplier(const MapJet& m, JetState& s, MultiplierJet& mult);

/// z_n = P^n(z0) together with dz_n/dz0 and d^2 z_n/dz0^2 (used to normalize
/// renormalized return maps).
struct SecondOrderJet {
  cplx z, d1, d2;
};
SecondOrderJet iterate_second_order(const Poly& P, const Poly& dP,
                                    const Poly& d2P, cplx z0, int n);

/// Newton refinement of a fixed point of P^p. Returns the refined point;
/// throws NoConvergence on stall. multiplier_out receives (P^p)'(z).
cplx refine_periodic_point(const Poly& P, cplx z0, int p, double tol,
                           cplx* multiplier_out = nullptr, int max_iter = 64);

/// Multiplier of the cycle through z under P^p.
cplx cycle_multiplier(const Poly& P, cplx z, int p);

/// Exact period of the cycle through z (smallest divisor q of p with
/// P^q(z) = z within tol), assuming P^p(z) = z.
int exact_period(const Poly& P, cplx z, int p, double tol);

}  // namespace biflab
