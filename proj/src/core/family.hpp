#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poly.hpp"
#include "types.hpp"
#include "vendor_json.hpp"

namespace biflab {

/// Multivariate polynomial in the complex parameter coordinates.
/// Coefficient tables are explicit so parameter derivatives are symbolic.
class ParamPoly {
 public:
  struct Term {
    std::vector<int> exps;  // one exponent per parameter coordinate
    cplx coeff;
  };

  ParamPoly() = default;
  ParamPoly(int nvars, std::vector<Term> terms);

  static ParamPoly constant(int nvars, cplx value);
  static ParamPoly coordinate(int nvars, int var);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  cplx eval(std::span<const cplx> lambda) const;
  ParamPoly partial(int var) const;
  /// Directional derivative sum_v dir[v] * d/d lambda_v, evaluated at lambda.
  cplx dir_deriv(std::span<const cplx> lambda, std::span<const cplx> dir) const;

  ParamPoly operator+(const ParamPoly& o) const;
  ParamPoly operator*(const ParamPoly& o) const;
  ParamPoly scaled(cplx s) const;

  nlohmann::json to_json() const;
  static ParamPoly from_json(const nlohmann::json& j, int nvars);

 private:
  void normalize();
  int nvars_ = 0;
  std::vector<Term> terms_;
};

enum class FamilyKind { Quadratic, BrannerHubbard, GenericPolynomial };

struct Orbit {
  std::vector<cplx> points;  // z_0 .. z_k (k = n if no escape)
  bool escaped = false;
  int escape_time = -1;  // first index with |z| > escape_radius
};

struct CriticalPoint {
  cplx z;
  int multiplicity = 1;  // 1 = simple (local degree 2)
};

/// A holomorphic polynomial family with marked critical points.
/// Immutable after construction; all evaluation is pure.
class Family {
 public:
  static Family quadratic();
  static Family branner_hubbard(int d);
  static Family generic(int param_dim, std::vector<ParamPoly> coeffs,
                        std::vector<ParamPoly> marked_critical_points);

  static Family from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  FamilyKind kind() const { return kind_; }
  int degree() const { return static_cast<int>(coeff_polys_.size()) - 1; }
  int param_dim() const { return param_dim_; }
  int num_marked() const { return static_cast<int>(crit_polys_.size()); }

  /// f_lambda as a univariate polynomial in z.
  Poly instantiate(std::span<const cplx> lambda) const;
  /// Directional derivative of the coefficients along dir (a polynomial in z).
  Poly instantiate_dir(std::span<const cplx> lambda,
                       std::span<const cplx> dir) const;

  cplx eval(std::span<const cplx> lambda, cplx z) const;
  cplx derivative_z(std::span<const cplx> lambda, cplx z) const;
  cplx derivative_param(std::span<const cplx> lambda, cplx z,
                        std::span<const cplx> dir) const;

  cplx marked_point(int i, std::span<const cplx> lambda) const;
  cplx marked_point_dir(int i, std::span<const cplx> lambda,
                        std::span<const cplx> dir) const;

  /// Marked critical points with multiplicities. Throws
  /// CollidedCriticalPoints when two marked points coincide.
  std::vector<CriticalPoint> critical_points(std::span<const cplx> lambda,
                                             double tol = 1e-12) const;

  double default_escape_radius(std::span<const cplx> lambda) const;

  Orbit iterate(std::span<const cplx> lambda, cplx z, int n,
                double escape_radius) const;

  /// Empty family; every evaluation on it is invalid. Exists so aggregates
  /// holding a Family are default-constructible.
  Family() = default;

 private:
  FamilyKind kind_ = FamilyKind::GenericPolynomial;
  int param_dim_ = 1;
  std::vector<ParamPoly> coeff_polys_;  // a_0 .. a_d as functions of lambda
  std::vector<ParamPoly> crit_polys_;   // marked critical points c_i(lambda)
};

/// Affine slice lambda(t) = base + sum_j t_j * dirs[j], optionally corrected
/// so that a set of critical-orbit collision relations keeps holding along
/// the slice (Newton solve in the corrector directions).
struct SliceConstraint {
  int crit_index = 0;
  int preperiod = 1;  // m >= 1
  int period = 1;     // p >= 1
};

struct Slice {
  std::vector<cplx> base;
  std::vector<std::vector<cplx>> dirs;
  std::vector<SliceConstraint> constraints;
  std::vector<std::vector<cplx>> corrector_dirs;  // one per constraint

  int dim() const { return static_cast<int>(dirs.size()); }

  static Slice full(int m);  // identity chart of C^m
  static Slice line(std::vector<cplx> base, std::vector<cplx> dir);
};

/// Resolve a slice coordinate to a parameter point, running the constraint
/// corrector when present. Throws NoConvergence if the corrector stalls.
std::vector<cplx> slice_point(const Family& fam, const Slice& slice,
                              std::span<const cplx> t, double tol = 1e-12);

}  // namespace biflab
