#pragma once

#include <span>
#include <string>
#include <vector>

#include "cycles.hpp"
#include "family.hpp"
#include "grid.hpp"
#include "misiurewicz.hpp"
#include "types.hpp"

namespace biflab {

/// A renormalization window: a 1-d slice through parameter space on which
/// the n1-fold return map of a marked critical point behaves like z^2 + zeta.
/// The chart is affine in the slice coordinate: t(zeta) = t_center +
/// zeta * scale; its two anchors are the period-n1 (zeta = 0) and
/// period-2*n1 (zeta = -1) superattracting centers.
struct RenormWindow {
  Family family;
  Slice slice;  // 1-d, constraint corrector holds the other relations
  int crit_index = 0;
  int n1 = 1;
  cplx t_center{0.0, 0.0};
  cplx scale{0.0, 0.0};
  cplx beta{1.0, 0.0};  // dynamical rescaling z -> c + beta * z
  double R = 20.0;
  double R_param = 2.5;
  double h_sup = 0.0;
  bool epsilon_ok = false;
  double delta_emp = 0.25;

  cplx chart_t(cplx zeta) const { return t_center + zeta * scale; }
  std::vector<cplx> chart_lambda(cplx zeta) const;
  /// Renormalized return map g_zeta(z) in rescaled coordinates.
  cplx return_map(cplx zeta, cplx z) const;
};

struct RenormSearchConfig {
  cplx t_seed{0.0, 0.0};        // slice-coordinate seed for anchor (a)
  double search_radius = 0.5;   // accept centers within this of the seed
  int max_return_multiple = 8;  // try n1 = p, 2p, ..., p * this
  double R = 20.0;
  double R_param = 2.5;
  double delta_emp = 0.25;
  int h_samples = 32;  // per axis, 4 axes
};

/// Model window: the quadratic family itself, with the identity chart, for
/// which the return map is exactly z^2 + zeta.
RenormWindow model_window();

/// Fit a renormalization window for critical point i along a 1-d slice
/// through the certificate parameter; the certificate's other constraints
/// are maintained by the slice corrector.
RenormWindow find_renorm_window(const Family& fam,
                                const MisiurewiczCertificate& cert,
                                int crit_index, const Slice& slice,
                                const RenormSearchConfig& cfg = {});

struct BabyMandelbrot {
  GridField grid;  // 0/1 membership over the zeta window
  int max_iter = 0;
};

/// Membership bitmap: zeta is a member iff the renormalized critical orbit
/// stays in D(0, R) for max_iter return-map steps.
BabyMandelbrot baby_mandelbrot(const RenormWindow& window, int resolution,
                               int max_iter);

enum class StraightenMode { Center, Multiplier, Neutral };
const char* straighten_mode_name(StraightenMode m);

struct StraighteningDiagnostic {
  StraightenMode mode;
  cplx zeta;
  int model_period = 0;  // q (model); the family cycle has period q * n1
  cplx t{0.0, 0.0};      // solved slice coordinate
  std::vector<cplx> lambda;
  cplx multiplier{0.0, 0.0};
  double distance = 0.0;  // |lambda_solved - psi(zeta)| (neutral mode)
  bool pass = false;
  // hybrid conjugacy is verified only through these observable consequences
  std::string scope =
      "numerical proxy: center periods / polished multipliers / neutral "
      "solvability only";
};

/// Straightening diagnostics against the z^2 + zeta model.
/// model_period: the model cycle period q (deduced for center mode when 0).
/// theta: neutral target rotation number (neutral mode only).
StraighteningDiagnostic straightening_check(const RenormWindow& window,
                                            cplx zeta, StraightenMode mode,
                                            int model_period = 0,
                                            double theta = 0.0);

struct FactorDiagnostic {
  int factor = 0;
  std::string type;  // "center" or "misiurewicz"
  cplx multiplier{0.0, 0.0};
  bool pass = false;
};

struct ProductEmbeddingSample {
  std::vector<cplx> model_input;
  std::vector<cplx> lambda;
  std::vector<FactorDiagnostic> diagnostics;
  double residual = 0.0;
  int sweeps = 0;
};

struct EmbeddingConfig {
  double tol = 1e-9;
  int max_sweeps = 100;
  uint64_t retry_seed = 1;  // random-order retry on divergence
};

/// Alternating 1-d Newton projection onto the k factor target equations
/// (one per window), starting from the windows' common base parameter.
ProductEmbeddingSample product_embedding_sample(
    const Family& fam, std::span<const RenormWindow> windows,
    std::span<const cplx> model_input, const EmbeddingConfig& cfg = {});

/// Max factor-equation residual of a stored embedding sample (for re-checks).
double embedding_joint_residual(const Family& fam,
                                std::span<const RenormWindow> windows,
                                std::span<const cplx> model_input,
                                std::span<const cplx> lambda);

struct BoxDimEstimate {
  double dimension = 0.0;
  double r2 = 0.0;
  std::vector<double> log_inv_eps;
  std::vector<double> log_count;
};

/// Box-counting slope over dyadic coarsenings of a 0/1 bitmap.
BoxDimEstimate boxdim(const GridField& bitmap, int min_scales = 4);

struct HolderEstimate {
  double exponent = 0.0;
  double ci_halfwidth = 0.0;  // 95% on the slope
  double r2 = 0.0;
  int n_pairs = 0;
};

/// Regression exponent of log(parameter distance) vs log(model distance).
HolderEstimate holder_exponent_probe(
    std::span<const std::pair<double, double>> pairs);

/// (model distance, parameter distance) pairs from matched hyperbolic
/// centers of period <= max_period, for the Holder probe.
std::vector<std::pair<double, double>> embedding_distance_samples(
    const RenormWindow& window, int max_period);

}  // namespace biflab
