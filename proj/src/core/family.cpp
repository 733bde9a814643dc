#include "family.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace biflab {

// ---------------------------------------------------------------- ParamPoly

ParamPoly::ParamPoly(int nvars, std::vector<Term> terms)
    : nvars_(nvars), terms_(std::move(terms)) {
  normalize();
}

ParamPoly ParamPoly::constant(int nvars, cplx value) {
  if (value == cplx(0.0, 0.0)) return ParamPoly(nvars, {});
  return ParamPoly(nvars, {{std::vector<int>(nvars, 0), value}});
}

ParamPoly ParamPoly::coordinate(int nvars, int var) {
  std::vector<int> e(nvars, 0);
  e[var] = 1;
  return ParamPoly(nvars, {{std::move(e), cplx(1.0, 0.0)}});
}

void ParamPoly::normalize() {
  std::map<std::vector<int>, cplx> acc;
  for (auto& t : terms_) {
    if (static_cast<int>(t.exps.size()) != nvars_)
      fail(Errc::Validation, "ParamPoly term arity mismatch");
    acc[t.exps] += t.coeff;
  }
  terms_.clear();
  for (auto& [e, c] : acc)
    if (c != cplx(0.0, 0.0)) terms_.push_back({e, c});
}

cplx ParamPoly::eval(std::span<const cplx> lambda) const {
  cplx out(0.0, 0.0);
  for (const auto& t : terms_) {
    cplx m = t.coeff;
    for (int v = 0; v < nvars_; ++v)
      for (int e = 0; e < t.exps[v]; ++e) m *= lambda[v];
    out += m;
  }
  return out;
}

ParamPoly ParamPoly::partial(int var) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    if (t.exps[var] == 0) continue;
    Term d = t;
    d.coeff *= static_cast<double>(t.exps[var]);
    d.exps[var] -= 1;
    out.push_back(std::move(d));
  }
  return ParamPoly(nvars_, std::move(out));
}

cplx ParamPoly::dir_deriv(std::span<const cplx> lambda,
                          std::span<const cplx> dir) const {
  cplx out(0.0, 0.0);
  for (const auto& t : terms_) {
    for (int v = 0; v < nvars_; ++v) {
      if (t.exps[v] == 0 || dir[v] == cplx(0.0, 0.0)) continue;
      cplx m = t.coeff * static_cast<double>(t.exps[v]) * dir[v];
      for (int u = 0; u < nvars_; ++u) {
        int e = t.exps[u] - (u == v ? 1 : 0);
        for (int k = 0; k < e; ++k) m *= lambda[u];
      }
      out += m;
    }
  }
  return out;
}

ParamPoly ParamPoly::operator+(const ParamPoly& o) const {
  std::vector<Term> out = terms_;
  out.insert(out.end(), o.terms_.begin(), o.terms_.end());
  return ParamPoly(nvars_, std::move(out));
}

ParamPoly ParamPoly::operator*(const ParamPoly& o) const {
  std::vector<Term> out;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) {
      Term t;
      t.coeff = a.coeff * b.coeff;
      t.exps.resize(nvars_);
      for (int v = 0; v < nvars_; ++v) t.exps[v] = a.exps[v] + b.exps[v];
      out.push_back(std::move(t));
    }
  return ParamPoly(nvars_, std::move(out));
}

ParamPoly ParamPoly::scaled(cplx s) const {
  std::vector<Term> out = terms_;
  for (auto& t : out) t.coeff *= s;
  return ParamPoly(nvars_, std::move(out));
}

nlohmann::json ParamPoly::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : terms_)
    arr.push_back({{"exps", t.exps},
                   {"re", t.coeff.real()},
                   {"im", t.coeff.imag()}});
  return arr;
}

ParamPoly ParamPoly::from_json(const nlohmann::json& j, int nvars) {
  std::vector<Term> terms;
  for (const auto& tj : j) {
    Term t;
    t.exps = tj.at("exps").get<std::vector<int>>();
    t.coeff = cplx(tj.at("re").get<double>(), tj.value("im", 0.0));
    terms.push_back(std::move(t));
  }
  return ParamPoly(nvars, std::move(terms));
}

// ------------------------------------------------------------------- Family

Family Family::quadratic() {
  Family f;
  f.kind_ = FamilyKind::Quadratic;
  f.param_dim_ = 1;
  f.coeff_polys_ = {ParamPoly::coordinate(1, 0), ParamPoly::constant(1, 0.0),
                    ParamPoly::constant(1, 1.0)};
  f.crit_polys_ = {ParamPoly::constant(1, 0.0)};
  return f;
}

Family Family::branner_hubbard(int d) {
  if (d < 3) fail(Errc::Validation, "branner_hubbard requires degree >= 3");
  Family f;
  f.kind_ = FamilyKind::BrannerHubbard;
  f.param_dim_ = d - 1;  // (c_1 .. c_{d-2}, a)
  const int m = d - 1;

  // elementary symmetric polynomials sigma_0 .. sigma_{d-2} in c_1..c_{d-2}
  std::vector<ParamPoly> sigma(d - 1);
  sigma[0] = ParamPoly::constant(m, 1.0);
  for (int k = 1; k <= d - 2; ++k) sigma[k] = ParamPoly(m, {});
  for (int i = 0; i < d - 2; ++i) {
    ParamPoly ci = ParamPoly::coordinate(m, i);
    for (int k = d - 2; k >= 1; --k) sigma[k] = sigma[k] + sigma[k - 1] * ci;
  }

  f.coeff_polys_.resize(d + 1, ParamPoly(m, {}));
  // constant term a^d
  {
    std::vector<int> e(m, 0);
    e[m - 1] = d;
    f.coeff_polys_[0] = ParamPoly(m, {{std::move(e), cplx(1.0, 0.0)}});
  }
  for (int j = 2; j <= d - 1; ++j) {
    double sign = ((d - j) % 2 == 0) ? 1.0 : -1.0;
    f.coeff_polys_[j] = sigma[d - j].scaled(sign / static_cast<double>(j));
  }
  f.coeff_polys_[d] = ParamPoly::constant(m, 1.0 / static_cast<double>(d));

  f.crit_polys_.push_back(ParamPoly::constant(m, 0.0));
  for (int i = 0; i < d - 2; ++i)
    f.crit_polys_.push_back(ParamPoly::coordinate(m, i));
  return f;
}

Family Family::generic(int param_dim, std::vector<ParamPoly> coeffs,
                       std::vector<ParamPoly> marked) {
  if (param_dim < 1) fail(Errc::Validation, "param_dim must be >= 1");
  if (coeffs.size() < 3) fail(Errc::Validation, "degree must be >= 2");
  Family f;
  f.kind_ = FamilyKind::GenericPolynomial;
  f.param_dim_ = param_dim;
  f.coeff_polys_ = std::move(coeffs);
  f.crit_polys_ = std::move(marked);
  return f;
}

Poly Family::instantiate(std::span<const cplx> lambda) const {
  std::vector<cplx> c(coeff_polys_.size());
  for (size_t k = 0; k < c.size(); ++k) c[k] = coeff_polys_[k].eval(lambda);
  Poly p(std::move(c));
  if (p.degree() != static_cast<int>(coeff_polys_.size()) - 1)
    fail(Errc::Validation, "leading coefficient vanished at this parameter");
  return p;
}

Poly Family::instantiate_dir(std::span<const cplx> lambda,
                             std::span<const cplx> dir) const {
  std::vector<cplx> c(coeff_polys_.size());
  for (size_t k = 0; k < c.size(); ++k)
    c[k] = coeff_polys_[k].dir_deriv(lambda, dir);
  return Poly(std::move(c));
}

cplx Family::eval(std::span<const cplx> lambda, cplx z) const {
  cplx w = instantiate(lambda)(z);
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    fail(Errc::EscapeOverflow, "evaluation overflowed");
  return w;
}

cplx Family::derivative_z(std::span<const cplx> lambda, cplx z) const {
  return instantiate(lambda).derivative()(z);
}

cplx Family::derivative_param(std::span<const cplx> lambda, cplx z,
                              std::span<const cplx> dir) const {
  return instantiate_dir(lambda, dir)(z);
}

cplx Family::marked_point(int i, std::span<const cplx> lambda) const {
  return crit_polys_.at(i).eval(lambda);
}

cplx Family::marked_point_dir(int i, std::span<const cplx> lambda,
                              std::span<const cplx> dir) const {
  return crit_polys_.at(i).dir_deriv(lambda, dir);
}

std::vector<CriticalPoint> Family::critical_points(
    std::span<const cplx> lambda, double tol) const {
  std::vector<CriticalPoint> out;
  Poly dp = instantiate(lambda).derivative();
  Poly d2p = dp.derivative();
  for (int i = 0; i < num_marked(); ++i) {
    cplx z = marked_point(i, lambda);
    for (const auto& prev : out)
      if (std::abs(prev.z - z) <= tol)
        fail(Errc::CollidedCriticalPoints,
             "marked critical points coincide at this parameter");
    CriticalPoint cp;
    cp.z = z;
    // order of vanishing of f' at z
    Poly q = dp;
    cp.multiplicity = 0;
    double scale = 1.0 + dp.coeff_magnitude_sum();
    while (!q.zero() && std::abs(q(z)) <= tol * scale) {
      ++cp.multiplicity;
      q = q.derivative();
    }
    if (cp.multiplicity == 0) cp.multiplicity = 1;  // residual-level zero
    (void)d2p;
    out.push_back(cp);
  }
  return out;
}

double Family::default_escape_radius(std::span<const cplx> lambda) const {
  return std::max(1e3, 2.0 * instantiate(lambda).coeff_magnitude_sum());
}

Orbit Family::iterate(std::span<const cplx> lambda, cplx z, int n,
                      double escape_radius) const {
  if (n < 0) fail(Errc::Validation, "iterate requires n >= 0");
  Poly p = instantiate(lambda);
  Orbit orb;
  orb.points.reserve(n + 1);
  orb.points.push_back(z);
  for (int k = 0; k < n; ++k) {
    if (std::abs(orb.points.back()) > escape_radius) {
      orb.escaped = true;
      orb.escape_time = k;
      return orb;
    }
    cplx w = p(orb.points.back());
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
      orb.escaped = true;
      orb.escape_time = k;
      return orb;
    }
    orb.points.push_back(w);
  }
  if (std::abs(orb.points.back()) > escape_radius) {
    orb.escaped = true;
    orb.escape_time = n;
  }
  return orb;
}

nlohmann::json Family::to_json() const {
  switch (kind_) {
    case FamilyKind::Quadratic:
      return {{"kind", "quadratic"}};
    case FamilyKind::BrannerHubbard:
      return {{"kind", "branner_hubbard"}, {"degree", degree()}};
    case FamilyKind::GenericPolynomial: {
      nlohmann::json coeffs = nlohmann::json::array();
      for (const auto& c : coeff_polys_) coeffs.push_back(c.to_json());
      nlohmann::json crit = nlohmann::json::array();
      for (const auto& c : crit_polys_) crit.push_back(c.to_json());
      return {{"kind", "generic"},
              {"param_dim", param_dim_},
              {"coeffs", coeffs},
              {"critical_points", crit}};
    }
  }
  fail(Errc::Validation, "unknown family kind");
}

Family Family::from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "quadratic") return quadratic();
  if (kind == "branner_hubbard")
    return branner_hubbard(j.at("degree").get<int>());
  if (kind == "generic") {
    int m = j.at("param_dim").get<int>();
    std::vector<ParamPoly> coeffs, crit;
    for (const auto& cj : j.at("coeffs"))
      coeffs.push_back(ParamPoly::from_json(cj, m));
    for (const auto& cj : j.at("critical_points"))
      crit.push_back(ParamPoly::from_json(cj, m));
    return generic(m, std::move(coeffs), std::move(crit));
  }
  fail(Errc::Validation, "unknown family kind '" + kind + "'");
}

// -------------------------------------------------------------------- Slice

Slice Slice::full(int m) {
  Slice s;
  s.base.assign(m, cplx(0.0, 0.0));
  for (int j = 0; j < m; ++j) {
    std::vector<cplx> d(m, cplx(0.0, 0.0));
    d[j] = cplx(1.0, 0.0);
    s.dirs.push_back(std::move(d));
  }
  return s;
}

Slice Slice::line(std::vector<cplx> base, std::vector<cplx> dir) {
  Slice s;
  s.base = std::move(base);
  s.dirs.push_back(std::move(dir));
  return s;
}

}  // namespace biflab
