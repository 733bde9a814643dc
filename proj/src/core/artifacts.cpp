#include "artifacts.hpp"

#include <cmath>
#include <fstream>

namespace biflab {

using nlohmann::json;

json cplx_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    fail(Errc::Validation, "complex values are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

json cvec_to_json(std::span<const cplx> v) {
  json a = json::array();
  for (cplx z : v) a.push_back(cplx_to_json(z));
  return a;
}

std::vector<cplx> cvec_from_json(const json& j) {
  std::vector<cplx> v;
  for (const auto& e : j) v.push_back(cplx_from_json(e));
  return v;
}

json slice_to_json(const Slice& s) {
  json j;
  j["base"] = cvec_to_json(s.base);
  j["dirs"] = json::array();
  for (const auto& d : s.dirs) j["dirs"].push_back(cvec_to_json(d));
  j["constraints"] = json::array();
  for (const auto& c : s.constraints)
    j["constraints"].push_back({{"crit_index", c.crit_index},
                                {"preperiod", c.preperiod},
                                {"period", c.period}});
  j["corrector_dirs"] = json::array();
  for (const auto& d : s.corrector_dirs)
    j["corrector_dirs"].push_back(cvec_to_json(d));
  return j;
}

Slice slice_from_json(const json& j) {
  Slice s;
  s.base = cvec_from_json(j.at("base"));
  for (const auto& d : j.at("dirs")) s.dirs.push_back(cvec_from_json(d));
  for (const auto& c : j.value("constraints", json::array()))
    s.constraints.push_back({c.at("crit_index").get<int>(),
                             c.at("preperiod").get<int>(),
                             c.at("period").get<int>()});
  for (const auto& d : j.value("corrector_dirs", json::array()))
    s.corrector_dirs.push_back(cvec_from_json(d));
  return s;
}

json cycle_to_json(const Cycle& c) {
  return {{"points", cvec_to_json(c.points)},
          {"multiplier", cplx_to_json(c.multiplier)},
          {"class", cycle_class_name(c.classification)},
          {"theta", c.theta},
          {"multiplicity", c.multiplicity},
          {"residual", c.residual}};
}

Cycle cycle_from_json(const json& j) {
  Cycle c;
  c.points = cvec_from_json(j.at("points"));
  c.multiplier = cplx_from_json(j.at("multiplier"));
  c.classification = classify_multiplier(c.multiplier);
  c.theta = j.value("theta", 0.0);
  c.multiplicity = j.value("multiplicity", 1);
  c.residual = j.value("residual", 0.0);
  return c;
}

json per_solution_artifact(const Family& fam, const Slice& slice, int n,
                           cplx w, const PerSolution& sol) {
  return {{"type", "per_solution"},
          {"family", fam.to_json()},
          {"slice", slice_to_json(slice)},
          {"n", n},
          {"w", cplx_to_json(w)},
          {"t", cvec_to_json(sol.t)},
          {"lambda", cvec_to_json(sol.lambda)},
          {"cycle", cycle_to_json(sol.cycle)},
          {"residual", sol.residual}};
}

json continuation_artifact(const Family& fam, const Slice& slice, int n,
                           const ContinuationResult& res) {
  json path = json::array();
  for (const auto& p : res.path)
    path.push_back({{"theta", p.theta},
                    {"t", cvec_to_json(p.solution.t)},
                    {"lambda", cvec_to_json(p.solution.lambda)},
                    {"cycle", cycle_to_json(p.solution.cycle)},
                    {"residual", p.solution.residual}});
  return {{"type", "continuation"},
          {"family", fam.to_json()},
          {"slice", slice_to_json(slice)},
          {"n", n},
          {"completed", res.completed},
          {"path", path}};
}

json neutral_artifact(const Family& fam, const Slice& slice,
                      const NeutralTargetSpec& spec,
                      const NeutralSolution& sol) {
  json cycles = json::array();
  for (const auto& c : sol.cycles) cycles.push_back(cycle_to_json(c));
  return {{"type", "neutral_solution"},
          {"family", fam.to_json()},
          {"slice", slice_to_json(slice)},
          {"periods", spec.periods},
          {"thetas", spec.thetas},
          {"t", cvec_to_json(sol.t)},
          {"lambda", cvec_to_json(sol.lambda)},
          {"cycles", cycles},
          {"residual", sol.residual},
          {"jacobian_rank", sol.jacobian_rank},
          {"min_cycle_separation", sol.min_cycle_separation}};
}

NeutralSolution neutral_from_artifact(const json& j,
                                      NeutralTargetSpec* spec_out) {
  NeutralSolution s;
  s.t = cvec_from_json(j.at("t"));
  s.lambda = cvec_from_json(j.at("lambda"));
  for (const auto& c : j.at("cycles")) s.cycles.push_back(cycle_from_json(c));
  s.residual = j.value("residual", 0.0);
  s.jacobian_rank = j.value("jacobian_rank", 0);
  s.min_cycle_separation = j.value("min_cycle_separation", 0.0);
  if (spec_out) {
    spec_out->periods = j.at("periods").get<std::vector<int>>();
    spec_out->thetas = j.at("thetas").get<std::vector<double>>();
  }
  return s;
}

json misiurewicz_artifact(const Family& fam, const Slice& slice,
                          const MisiurewiczCertificate& cert) {
  json constraints = json::array();
  for (const auto& c : cert.constraints)
    constraints.push_back({{"crit_index", c.crit_index},
                           {"preperiod", c.preperiod},
                           {"period", c.period}});
  json cycles = json::array();
  for (const auto& orb : cert.landing_cycles) cycles.push_back(cvec_to_json(orb));
  json chi = json::array();
  for (const auto& row : cert.chi_jacobian) chi.push_back(cvec_to_json(row));
  return {{"type", "misiurewicz_certificate"},
          {"family", fam.to_json()},
          {"slice", slice_to_json(slice)},
          {"constraints", constraints},
          {"t", cvec_to_json(cert.t)},
          {"lambda", cvec_to_json(cert.lambda)},
          {"landing_cycles", cycles},
          {"landing_multipliers", cvec_to_json(cert.landing_multipliers)},
          {"residual", cert.residual},
          {"chi_jacobian", chi},
          {"transversality_det", cplx_to_json(cert.transversality_det)},
          {"transversal", cert.transversal},
          {"rank", cert.rank},
          {"precision", "double floating point with stated margins"}};
}

MisiurewiczCertificate misiurewicz_from_artifact(const json& j, Family* fam_out,
                                                 Slice* slice_out) {
  MisiurewiczCertificate c;
  for (const auto& cc : j.at("constraints"))
    c.constraints.push_back({cc.at("crit_index").get<int>(),
                             cc.at("preperiod").get<int>(),
                             cc.at("period").get<int>()});
  c.t = cvec_from_json(j.at("t"));
  c.lambda = cvec_from_json(j.at("lambda"));
  for (const auto& orb : j.at("landing_cycles"))
    c.landing_cycles.push_back(cvec_from_json(orb));
  c.landing_multipliers = cvec_from_json(j.at("landing_multipliers"));
  c.residual = j.value("residual", 0.0);
  for (const auto& row : j.at("chi_jacobian"))
    c.chi_jacobian.push_back(cvec_from_json(row));
  c.transversality_det = cplx_from_json(j.at("transversality_det"));
  c.transversal = j.value("transversal", false);
  c.rank = j.value("rank", 0);
  if (fam_out) *fam_out = Family::from_json(j.at("family"));
  if (slice_out) *slice_out = slice_from_json(j.at("slice"));
  return c;
}

json window_artifact(const RenormWindow& w) {
  return {{"type", "renorm_window"},
          {"family", w.family.to_json()},
          {"slice", slice_to_json(w.slice)},
          {"crit_index", w.crit_index},
          {"n1", w.n1},
          {"t_center", cplx_to_json(w.t_center)},
          {"scale", cplx_to_json(w.scale)},
          {"beta", cplx_to_json(w.beta)},
          {"R", w.R},
          {"R_param", w.R_param},
          {"h_sup", w.h_sup},
          {"epsilon_ok", w.epsilon_ok},
          {"delta_emp", w.delta_emp},
          {"scope",
           "hybrid conjugacy checked via observable consequences only"}};
}

RenormWindow window_from_artifact(const json& j) {
  RenormWindow w;
  w.family = Family::from_json(j.at("family"));
  w.slice = slice_from_json(j.at("slice"));
  w.crit_index = j.at("crit_index").get<int>();
  w.n1 = j.at("n1").get<int>();
  w.t_center = cplx_from_json(j.at("t_center"));
  w.scale = cplx_from_json(j.at("scale"));
  w.beta = cplx_from_json(j.at("beta"));
  w.R = j.value("R", 20.0);
  w.R_param = j.value("R_param", 2.5);
  w.h_sup = j.value("h_sup", 0.0);
  w.epsilon_ok = j.value("epsilon_ok", false);
  w.delta_emp = j.value("delta_emp", 0.25);
  return w;
}

json embedding_artifact(const Family& fam,
                        std::span<const RenormWindow> windows,
                        const ProductEmbeddingSample& s) {
  json wins = json::array();
  for (const auto& w : windows) wins.push_back(window_artifact(w));
  json diags = json::array();
  for (const auto& d : s.diagnostics)
    diags.push_back({{"factor", d.factor},
                     {"type", d.type},
                     {"multiplier", cplx_to_json(d.multiplier)},
                     {"pass", d.pass}});
  return {{"type", "embedding_sample"},
          {"family", fam.to_json()},
          {"windows", wins},
          {"model_input", cvec_to_json(s.model_input)},
          {"lambda", cvec_to_json(s.lambda)},
          {"diagnostics", diags},
          {"residual", s.residual},
          {"sweeps", s.sweeps}};
}

json straightening_artifact(const RenormWindow& w,
                            const StraighteningDiagnostic& d) {
  return {{"type", "straightening_diagnostic"},
          {"window", window_artifact(w)},
          {"mode", straighten_mode_name(d.mode)},
          {"zeta", cplx_to_json(d.zeta)},
          {"model_period", d.model_period},
          {"t", cplx_to_json(d.t)},
          {"lambda", cvec_to_json(d.lambda)},
          {"multiplier", cplx_to_json(d.multiplier)},
          {"distance", d.distance},
          {"pass", d.pass},
          {"scope", d.scope}};
}

json density_report_artifact(const DensityExperimentReport& r) {
  json trials = json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"radius", t.radius},
                      {"start", cvec_to_json(t.start)},
                      {"found", cvec_to_json(t.found)},
                      {"distance", t.distance},
                      {"residual", t.residual},
                      {"rank", t.rank},
                      {"hit", t.hit},
                      {"reverified", t.reverified},
                      {"detail", t.detail}});
  return {{"type", "density_experiment"},
          {"name", r.name},
          {"k", r.k},
          {"thetas", r.thetas},
          {"family", r.family},
          {"trials", trials},
          {"success", r.success},
          {"criterion", r.criterion}};
}

json stratification_artifact(const StratificationReport& r) {
  return {{"type", "stratification_report"},
          {"found", r.found},
          {"ball_center", cplx_to_json(r.ball_center)},
          {"ball_radius", r.ball_radius},
          {"active_index", r.active_index},
          {"passive_index", r.passive_index},
          {"active_mass", r.active_mass},
          {"passive_mass", r.passive_mass},
          {"cells_scanned", r.cells_scanned},
          {"cells_active_both", r.cells_active_both},
          {"cells_passive_both", r.cells_passive_both},
          {"cells_mixed", r.cells_mixed},
          {"cells_undecided", r.cells_undecided}};
}

// --------------------------------------------------------------------- verify

namespace {

void check(VerifyReport& rep, bool ok, const std::string& name) {
  (ok ? rep.checks : rep.failures).push_back(name);
}

VerifyReport verify_misiurewicz(const json& j) {
  VerifyReport rep;
  Family fam;
  Slice slice;
  MisiurewiczCertificate stored =
      misiurewicz_from_artifact(j, &fam, &slice);
  MisiurewiczOptions opts;
  opts.require_transversal = false;
  MisiurewiczCertificate fresh =
      solve_misiurewicz(fam, slice, stored.constraints, stored.t, opts);
  double dl = 0.0;
  for (size_t i = 0; i < stored.lambda.size(); ++i)
    dl = std::max(dl, std::abs(stored.lambda[i] - fresh.lambda[i]));
  check(rep, dl < 1e-8, "parameter re-derivation within 1e-8");
  check(rep, fresh.residual <= 1e-10, "residual <= 1e-10");
  bool mults = stored.landing_multipliers.size() ==
               fresh.landing_multipliers.size();
  if (mults)
    for (size_t i = 0; i < stored.landing_multipliers.size(); ++i)
      if (std::abs(stored.landing_multipliers[i] -
                   fresh.landing_multipliers[i]) > 1e-6)
        mults = false;
  check(rep, mults, "landing multipliers match recomputation");
  bool repelling = true;
  for (cplx m : fresh.landing_multipliers)
    if (std::abs(m) <= 1.0 + 1e-8) repelling = false;
  check(rep, repelling, "landing cycles repelling with margin 1e-8");
  check(rep,
        std::abs(stored.transversality_det - fresh.transversality_det) <=
            1e-6 * (1.0 + std::abs(fresh.transversality_det)),
        "transversality determinant matches recomputation");
  check(rep, stored.transversal == fresh.transversal,
        "transversality verdict matches");
  // round trip: the critical orbit returns to the landing cycle
  Poly P = fam.instantiate(fresh.lambda);
  bool round_trip = true;
  for (size_t i = 0; i < fresh.constraints.size(); ++i) {
    const auto& c = fresh.constraints[i];
    cplx z = fam.marked_point(c.crit_index, fresh.lambda);
    for (int s = 0; s < c.preperiod + 3 * c.period; ++s) z = P(z);
    double dmin = 1e300;
    for (cplx a : fresh.landing_cycles[i])
      dmin = std::min(dmin, std::abs(z - a));
    if (dmin > 1e-8) round_trip = false;
  }
  check(rep, round_trip, "forward orbit returns to the landing cycle");
  rep.pass = rep.failures.empty();
  return rep;
}

VerifyReport verify_per(const json& j) {
  VerifyReport rep;
  Family fam = Family::from_json(j.at("family"));
  Slice slice = slice_from_json(j.at("slice"));
  int n = j.at("n").get<int>();
  cplx w = cplx_from_json(j.at("w"));
  std::vector<cplx> t = cvec_from_json(j.at("t"));
  Cycle cyc = cycle_from_json(j.at("cycle"));
  PerSolution fresh = solve_per(fam, slice, n, w, t[0], cyc.points[0]);
  check(rep, std::abs(fresh.t[0] - t[0]) < 1e-8,
        "parameter re-derivation within 1e-8");
  check(rep, fresh.residual <= 1e-10, "residual <= 1e-10");
  check(rep, std::abs(fresh.cycle.multiplier - w) < 1e-8,
        "multiplier matches the target");
  check(rep, std::abs(cyc.multiplier - fresh.cycle.multiplier) < 1e-6,
        "stored multiplier matches recomputation");
  check(rep, fresh.cycle.period() == n, "exact period matches");
  rep.pass = rep.failures.empty();
  return rep;
}

VerifyReport verify_neutral(const json& j) {
  VerifyReport rep;
  Family fam = Family::from_json(j.at("family"));
  Slice slice = slice_from_json(j.at("slice"));
  NeutralTargetSpec spec;
  NeutralSolution stored = neutral_from_artifact(j, &spec);
  std::vector<cplx> zs;
  for (const auto& c : stored.cycles) zs.push_back(c.points[0]);
  NeutralSolution fresh = solve_multi_neutral(fam, slice, spec, stored.t, zs);
  double dl = 0.0;
  for (size_t i = 0; i < stored.lambda.size(); ++i)
    dl = std::max(dl, std::abs(stored.lambda[i] - fresh.lambda[i]));
  check(rep, dl < 1e-8, "parameter re-derivation within 1e-8");
  check(rep, fresh.residual <= 1e-10, "residual <= 1e-10");
  check(rep, fresh.jacobian_rank >= spec.k(), "full multiplier-Jacobian rank");
  bool mults = true;
  for (size_t i = 0; i < stored.cycles.size(); ++i)
    if (std::abs(stored.cycles[i].multiplier - fresh.cycles[i].multiplier) >
        1e-6)
      mults = false;
  check(rep, mults, "stored multipliers match recomputation");
  rep.pass = rep.failures.empty();
  return rep;
}

VerifyReport verify_window(const json& j) {
  VerifyReport rep;
  RenormWindow w = window_from_artifact(j);
  check(rep, w.n1 >= 1, "return time n1 >= 1");
  check(rep, std::abs(w.scale) >= 1e-14, "chart scale nonzero");
  check(rep, w.h_sup >= 0.0, "h_sup >= 0");
  check(rep, w.epsilon_ok == (w.h_sup < w.delta_emp),
        "epsilon_ok consistent with h_sup and delta_emp");
  try {
    StraighteningDiagnostic d0 =
        straightening_check(w, cplx(0.0, 0.0), StraightenMode::Center);
    check(rep, d0.pass && std::abs(d0.t - w.t_center) < 1e-8,
          "anchor zeta=0 is the period-n1 center");
    StraighteningDiagnostic d1 =
        straightening_check(w, cplx(-1.0, 0.0), StraightenMode::Center);
    check(rep, d1.pass && std::abs(d1.t - (w.t_center - w.scale)) < 1e-8,
          "anchor zeta=-1 is the period-2*n1 center");
  } catch (const Error& e) {
    rep.failures.push_back(std::string("anchor re-check failed: ") + e.what());
  }
  rep.pass = rep.failures.empty();
  return rep;
}

VerifyReport verify_embedding(const json& j) {
  VerifyReport rep;
  Family fam = Family::from_json(j.at("family"));
  std::vector<RenormWindow> windows;
  for (const auto& wj : j.at("windows"))
    windows.push_back(window_from_artifact(wj));
  std::vector<cplx> input = cvec_from_json(j.at("model_input"));
  std::vector<cplx> lambda = cvec_from_json(j.at("lambda"));
  double res = embedding_joint_residual(fam, windows, input, lambda);
  check(rep, res <= 1e-9, "joint factor residual <= 1e-9");
  bool diags = true;
  for (const auto& d : j.at("diagnostics"))
    if (!d.at("pass").get<bool>()) diags = false;
  check(rep, diags, "all factor diagnostics pass");
  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace

VerifyReport verify_artifact(const json& artifact) {
  if (!artifact.is_object() || !artifact.contains("type") ||
      !artifact.at("type").is_string())
    fail(Errc::UnknownArtifactType, "artifact carries no type tag");
  std::string type = artifact.at("type").get<std::string>();
  try {
    if (type == "misiurewicz_certificate") return verify_misiurewicz(artifact);
    if (type == "per_solution") return verify_per(artifact);
    if (type == "neutral_solution") return verify_neutral(artifact);
    if (type == "renorm_window") return verify_window(artifact);
    if (type == "embedding_sample") return verify_embedding(artifact);
  } catch (const json::exception& e) {
    fail(Errc::UnknownArtifactType,
         std::string("malformed artifact: ") + e.what());
  } catch (const Error& e) {
    VerifyReport rep;
    rep.pass = false;
    rep.failures.push_back(std::string("re-derivation failed: ") + e.what());
    return rep;
  }
  fail(Errc::UnknownArtifactType, "unknown artifact type: " + type);
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open for writing: " + path);
  f << dump_canonical(j);
  if (!f) fail(Errc::Io, "write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open: " + path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded())
    fail(Errc::UnknownArtifactType, "not a JSON document: " + path);
  return j;
}

}  // namespace biflab
