#include "verbs.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "core/artifacts.hpp"
#include "core/currents.hpp"
#include "core/cycles.hpp"
#include "core/experiments.hpp"
#include "core/family.hpp"
#include "core/grid.hpp"
#include "core/misiurewicz.hpp"
#include "core/renorm.hpp"

namespace biflab {

using nlohmann::json;

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::Ok:
      return 0;
    case Errc::Validation:
    case Errc::NotPolynomial:
    case Errc::PeriodTooLarge:
    case Errc::CollidedCriticalPoints:
    case Errc::GridMismatch:
    case Errc::UnknownArtifactType:
    case Errc::OutsideChart:
    case Errc::InsufficientScales:
    case Errc::InsufficientSpread:
    case Errc::NoCertificateAvailable:
    case Errc::NotFound:
      return 2;
    case Errc::Io:
      return 4;
    default:
      return 3;
  }
}

json tolerance_table() {
  return json::array({
      {{"name", "cycles.newton_tol"}, {"default", 1e-12},
       {"module", "cycles"},
       {"doc", "Newton residual target for all periodic-point solves"}},
      {{"name", "cycles.tol_sep"}, {"default", 1e-6}, {"module", "cycles"},
       {"doc", "minimal distance between distinct neutral cycles"}},
      {{"name", "cycles.rank_rel_threshold"}, {"default", 1e-6},
       {"module", "cycles"},
       {"doc", "singular values above this fraction of sigma_max count "
               "toward the multiplier-Jacobian rank"}},
      {{"name", "misiurewicz.repelling_margin"}, {"default", 1e-8},
       {"module", "misiurewicz"},
       {"doc", "landing multipliers must exceed 1 + margin in modulus"}},
      {{"name", "misiurewicz.det_rel_threshold"}, {"default", 1e-8},
       {"module", "misiurewicz"},
       {"doc", "transversality claimed when |det| exceeds this times the "
               "row-norm product"}},
      {{"name", "renorm.delta_emp"}, {"default", 0.25}, {"module", "renorm"},
       {"doc", "empirical sup|h| threshold for epsilon_ok"}},
      {{"name", "embed.tol"}, {"default", 1e-9}, {"module", "renorm"},
       {"doc", "joint residual target of the alternating projection"}},
  });
}

namespace {

struct Tols {
  double newton_tol = 1e-12;
  double tol_sep = 1e-6;
  double rank_rel = 1e-6;
  double repelling_margin = 1e-8;
  double det_rel = 1e-8;
  double delta_emp = 0.25;
  double embed_tol = 1e-9;
};

Tols parse_tols(const json& config) {
  Tols t;
  if (!config.contains("tolerances")) return t;
  const json& j = config.at("tolerances");
  for (const auto& [key, val] : j.items()) {
    if (key == "cycles.newton_tol") t.newton_tol = val.get<double>();
    else if (key == "cycles.tol_sep") t.tol_sep = val.get<double>();
    else if (key == "cycles.rank_rel_threshold") t.rank_rel = val.get<double>();
    else if (key == "misiurewicz.repelling_margin")
      t.repelling_margin = val.get<double>();
    else if (key == "misiurewicz.det_rel_threshold")
      t.det_rel = val.get<double>();
    else if (key == "renorm.delta_emp") t.delta_emp = val.get<double>();
    else if (key == "embed.tol") t.embed_tol = val.get<double>();
    else fail(Errc::Validation, "unknown tolerance key: " + key);
  }
  return t;
}

void validate_keys(const json& config, const std::set<std::string>& allowed,
                   const std::set<std::string>& required,
                   const std::string& verb) {
  if (!config.is_object())
    fail(Errc::Validation, "config for " + verb + " must be a JSON object");
  for (const auto& [key, val] : config.items()) {
    (void)val;
    if (!allowed.count(key))
      fail(Errc::Validation, "unknown config key for " + verb + ": " + key);
  }
  for (const auto& key : required)
    if (!config.contains(key))
      fail(Errc::Validation, "missing config key for " + verb + ": " + key);
}

Family get_family(const json& config) {
  return Family::from_json(config.at("family"));
}

Slice get_slice(const json& config, const Family& fam) {
  if (config.contains("slice")) return slice_from_json(config.at("slice"));
  return Slice::full(fam.param_dim());
}

Box get_box(const json& j) {
  return Box{j.at("x0").get<double>(), j.at("x1").get<double>(),
             j.at("y0").get<double>(), j.at("y1").get<double>()};
}

Chart get_chart(const json& j) {
  return Chart::line(cvec_from_json(j.at("base")), cvec_from_json(j.at("dir")));
}

// artifact references are either inline documents or file paths
json load_doc(const json& v) {
  if (v.is_string()) return read_json_file(v.get<std::string>());
  if (v.is_object()) return v;
  fail(Errc::Validation, "expected an inline artifact or a file path");
}

cplx get_cplx(const json& v) { return cplx_from_json(v); }

uint64_t get_seed(const json& config) {
  return config.value("seed", static_cast<uint64_t>(1));
}

std::vector<MisiurewiczConstraint> get_constraints(const json& j) {
  std::vector<MisiurewiczConstraint> out;
  for (const auto& c : j)
    out.push_back({c.at("crit_index").get<int>(), c.at("preperiod").get<int>(),
                   c.at("period").get<int>()});
  return out;
}

// 1-d slice through a certificate parameter along one coordinate axis, with
// the certificate's other constraints corrector-maintained on the remaining
// axes
Slice window_slice_for(const Family& fam, const MisiurewiczCertificate& cert,
                       int crit_index, int axis) {
  const int m = fam.param_dim();
  if (axis < 0 || axis >= m) fail(Errc::Validation, "axis out of range");
  Slice s;
  s.base = cert.lambda;
  std::vector<cplx> dir(m, cplx(0.0, 0.0));
  dir[axis] = cplx(1.0, 0.0);
  s.dirs.push_back(dir);
  int corr_axis = 0;
  for (const auto& c : cert.constraints) {
    if (c.crit_index == crit_index) continue;
    s.constraints.push_back({c.crit_index, c.preperiod, c.period});
    while (corr_axis == axis) ++corr_axis;
    if (corr_axis >= m)
      fail(Errc::Validation, "not enough axes for the constraint corrector");
    std::vector<cplx> cd(m, cplx(0.0, 0.0));
    cd[corr_axis++] = cplx(1.0, 0.0);
    s.corrector_dirs.push_back(cd);
  }
  return s;
}

// ------------------------------------------------------------------- verbs

json verb_render(const json& config) {
  validate_keys(config,
                {"family", "chart", "window", "nx", "ny", "mode", "crit_index",
                 "depth", "max_iter", "out", "seed", "threads", "tolerances"},
                {"family", "chart", "window", "nx", "ny", "mode", "out"},
                "render");
  Family fam = get_family(config);
  Chart chart = get_chart(config.at("chart"));
  Box window = get_box(config.at("window"));
  int nx = config.at("nx").get<int>(), ny = config.at("ny").get<int>();
  if (nx < 3 || ny < 3)
    fail(Errc::Validation, "resolution must be at least 3x3");
  std::string mode = config.at("mode").get<std::string>();
  int crit = config.value("crit_index", 0);
  int depth = config.value("depth", 200);
  int max_iter = config.value("max_iter", 200);
  std::string out = config.at("out").get<std::string>();

  GridField g;
  if (mode == "escape") {
    g = escape_membership(fam, crit, chart, window, nx, ny, max_iter);
  } else if (mode == "density") {
    BifDensityConfig cfg;
    cfg.depth = depth;
    g = bif_density(fam, crit, chart, window, nx, ny, cfg);
  } else if (mode == "potential") {
    BifDensityConfig cfg;
    cfg.depth = depth;
    g = potential_field(fam, crit, chart, window, nx, ny, cfg);
  } else if (mode == "activity") {
    g = GridField(window, nx, ny);
    ActivityConfig acfg;
    acfg.depth = depth;
    double r = 0.5 * std::max(g.cell_w(), g.cell_h());
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        ActivityVerdict v = activity_test(
            fam, crit, chart, cplx(g.x_of(ix), g.y_of(iy)), r, acfg);
        g.at(ix, iy) = v.status == Activity::Active
                           ? 1.0
                           : (v.status == Activity::Undecided ? 0.5 : 0.0);
      }
    g.meta["kind"] = "activity";
  } else {
    fail(Errc::Validation, "unknown render mode: " + mode);
  }
  grid_write(g, out + ".grid");
  bool binary = (mode == "escape");
  grid_write_png(g, out + ".png", binary);
  long interior = 0;
  for (double v : g.values)
    if (v > 0.5) ++interior;
  return {{"verb", "render"},
          {"mode", mode},
          {"files", {out + ".grid", out + ".png"}},
          {"interior_count", interior},
          {"mass", g.mass()}};
}

json verb_solve_per(const json& config) {
  validate_keys(config,
                {"family", "slice", "n", "w", "theta", "t_seed", "z_seed",
                 "out", "seed", "threads", "tolerances"},
                {"family", "n", "t_seed", "z_seed"}, "solve-per");
  Family fam = get_family(config);
  Slice slice = get_slice(config, fam);
  Tols tols = parse_tols(config);
  int n = config.at("n").get<int>();
  cplx w;
  if (config.contains("w"))
    w = get_cplx(config.at("w"));
  else if (config.contains("theta"))
    w = unit_multiplier(config.at("theta").get<double>());
  else
    fail(Errc::Validation, "solve-per needs w or theta");
  SolveOptions opts;
  opts.tol = tols.newton_tol;
  PerSolution sol = solve_per(fam, slice, n, w, get_cplx(config.at("t_seed")),
                              get_cplx(config.at("z_seed")), opts);
  json art = per_solution_artifact(fam, slice, n, w, sol);
  if (config.contains("out"))
    write_json_file(art, config.at("out").get<std::string>());
  return art;
}

json verb_continue_per(const json& config) {
  validate_keys(config,
                {"family", "slice", "n", "theta_a", "theta_b", "steps",
                 "t_seed", "z_seed", "out", "seed", "threads", "tolerances"},
                {"family", "n", "theta_a", "theta_b", "steps", "t_seed",
                 "z_seed"},
                "continue-per");
  Family fam = get_family(config);
  Slice slice = get_slice(config, fam);
  Tols tols = parse_tols(config);
  SolveOptions opts;
  opts.tol = tols.newton_tol;
  ContinuationResult res = continue_per(
      fam, slice, config.at("n").get<int>(),
      config.at("theta_a").get<double>(), config.at("theta_b").get<double>(),
      config.at("steps").get<int>(), get_cplx(config.at("t_seed")),
      get_cplx(config.at("z_seed")), opts);
  json art = continuation_artifact(fam, slice, config.at("n").get<int>(), res);
  if (config.contains("out"))
    write_json_file(art, config.at("out").get<std::string>());
  if (!res.completed)
    fail(Errc::ContinuationStalled,
         "continuation stalled after " + std::to_string(res.path.size()) +
             " accepted points");
  return art;
}

json verb_solve_neutral(const json& config) {
  validate_keys(config,
                {"family", "slice", "periods", "thetas", "t_seed", "z_seed",
                 "out", "seed", "threads", "tolerances"},
                {"family", "periods", "thetas", "t_seed", "z_seed"},
                "solve-neutral");
  Family fam = get_family(config);
  Slice slice = get_slice(config, fam);
  Tols tols = parse_tols(config);
  NeutralTargetSpec spec;
  spec.periods = config.at("periods").get<std::vector<int>>();
  spec.thetas = config.at("thetas").get<std::vector<double>>();
  NeutralOptions opts;
  opts.solve.tol = tols.newton_tol;
  opts.tol_sep = tols.tol_sep;
  opts.rank_rel_threshold = tols.rank_rel;
  std::vector<cplx> t_seed = cvec_from_json(config.at("t_seed"));
  std::vector<cplx> z_seed;
  if (config.at("z_seed").is_string()) {
    if (config.at("z_seed").get<std::string>() != "nearest")
      fail(Errc::Validation, "z_seed must be an array or \"nearest\"");
    // seed each channel with the cycle point whose multiplier is closest to
    // the requested unit-circle target at t_seed
    for (size_t j = 0; j < spec.periods.size(); ++j) {
      cplx target = std::polar(1.0, 2.0 * M_PI * spec.thetas[j]);
      auto cycles = periodic_points(fam, t_seed, spec.periods[j]);
      if (cycles.empty()) fail(Errc::NoConvergence, "no cycles at t_seed");
      double bd = 1e300;
      cplx pick = cycles.front().points.front();
      for (const Cycle& c : cycles) {
        double dd = std::abs(c.multiplier - target);
        if (dd < bd) { bd = dd; pick = c.points.front(); }
      }
      z_seed.push_back(pick);
    }
  } else {
    z_seed = cvec_from_json(config.at("z_seed"));
  }
  NeutralSolution sol =
      solve_multi_neutral(fam, slice, spec, t_seed, z_seed, opts);
  json art = neutral_artifact(fam, slice, spec, sol);
  if (config.contains("out"))
    write_json_file(art, config.at("out").get<std::string>());
  return art;
}

json verb_find_misiurewicz(const json& config) {
  validate_keys(config,
                {"family", "slice", "mode", "constraints", "t_seed", "windows",
                 "k", "max_preperiod", "max_period", "n_seeds", "certificate",
                 "budget", "out", "seed", "threads", "tolerances"},
                {"family"}, "find-misiurewicz");
  Family fam = get_family(config);
  Slice slice = get_slice(config, fam);
  Tols tols = parse_tols(config);
  MisiurewiczOptions opts;
  opts.tol = tols.newton_tol;
  opts.repelling_margin = tols.repelling_margin;
  opts.det_rel_threshold = tols.det_rel;
  std::string mode = config.value("mode", "solve");

  if (mode == "solve") {
    auto constraints = get_constraints(config.at("constraints"));
    MisiurewiczCertificate cert = solve_misiurewicz(
        fam, slice, constraints, cvec_from_json(config.at("t_seed")), opts);
    json art = misiurewicz_artifact(fam, slice, cert);
    if (config.contains("out"))
      write_json_file(art, config.at("out").get<std::string>());
    return art;
  }
  if (mode == "sweep") {
    std::vector<Box> windows;
    for (const auto& b : config.at("windows")) windows.push_back(get_box(b));
    auto certs = multi_misiurewicz_sweep(
        fam, slice, windows, config.at("k").get<int>(),
        config.value("max_preperiod", 4), config.value("max_period", 3),
        config.value("n_seeds", 256), get_seed(config), opts);
    json arts = json::array();
    for (const auto& c : certs)
      arts.push_back(misiurewicz_artifact(fam, slice, c));
    json result = {{"verb", "find-misiurewicz"},
                   {"mode", "sweep"},
                   {"count", certs.size()},
                   {"certificates", arts}};
    if (config.contains("out"))
      write_json_file(result, config.at("out").get<std::string>());
    return result;
  }
  if (mode == "rescue") {
    json doc = load_doc(config.at("certificate"));
    Family cf;
    Slice cs;
    MisiurewiczCertificate cert = misiurewicz_from_artifact(doc, &cf, &cs);
    MisiurewiczCertificate fixed = transversality_rescue(
        cf, cs, cert, config.value("budget", 64), get_seed(config), opts);
    json art = misiurewicz_artifact(cf, cs, fixed);
    if (config.contains("out"))
      write_json_file(art, config.at("out").get<std::string>());
    return art;
  }
  fail(Errc::Validation, "unknown find-misiurewicz mode: " + mode);
}

json verb_find_window(const json& config) {
  validate_keys(config,
                {"family", "certificate", "crit_index", "axis", "slice",
                 "t_seed", "search_radius", "max_return_multiple", "R",
                 "R_param", "h_samples", "out", "seed", "threads",
                 "tolerances"},
                {"certificate", "crit_index"}, "find-window");
  json doc = load_doc(config.at("certificate"));
  Family fam;
  Slice cert_slice;
  MisiurewiczCertificate cert =
      misiurewicz_from_artifact(doc, &fam, &cert_slice);
  int crit = config.at("crit_index").get<int>();
  Slice slice = config.contains("slice")
                    ? slice_from_json(config.at("slice"))
                    : window_slice_for(fam, cert, crit,
                                       config.value("axis", 0));
  Tols tols = parse_tols(config);
  RenormSearchConfig cfg;
  cfg.delta_emp = tols.delta_emp;
  if (config.contains("t_seed")) cfg.t_seed = get_cplx(config.at("t_seed"));
  cfg.search_radius = config.value("search_radius", 0.5);
  cfg.max_return_multiple = config.value("max_return_multiple", 8);
  cfg.R = config.value("R", 20.0);
  cfg.R_param = config.value("R_param", 2.5);
  cfg.h_samples = config.value("h_samples", 32);
  RenormWindow w = find_renorm_window(fam, cert, crit, slice, cfg);
  json art = window_artifact(w);
  if (config.contains("out"))
    write_json_file(art, config.at("out").get<std::string>());
  return art;
}

json verb_baby_mandel(const json& config) {
  validate_keys(config,
                {"window", "model", "resolution", "max_iter", "out", "seed",
                 "threads", "tolerances"},
                {"resolution", "max_iter", "out"}, "baby-mandel");
  RenormWindow w = config.value("model", false)
                       ? model_window()
                       : window_from_artifact(load_doc(config.at("window")));
  BabyMandelbrot bm = baby_mandelbrot(w, config.at("resolution").get<int>(),
                                      config.at("max_iter").get<int>());
  std::string out = config.at("out").get<std::string>();
  grid_write(bm.grid, out + ".grid");
  grid_write_png(bm.grid, out + ".png", true);
  long members = 0;
  for (double v : bm.grid.values)
    if (v > 0.5) ++members;
  return {{"verb", "baby-mandel"},
          {"files", {out + ".grid", out + ".png"}},
          {"member_count", members},
          {"member_area", bm.grid.mass()}};
}

json verb_straighten_check(const json& config) {
  validate_keys(config,
                {"window", "model", "zeta", "mode", "model_period", "theta",
                 "out", "seed", "threads", "tolerances"},
                {"zeta", "mode"}, "straighten-check");
  RenormWindow w = config.value("model", false)
                       ? model_window()
                       : window_from_artifact(load_doc(config.at("window")));
  std::string ms = config.at("mode").get<std::string>();
  StraightenMode mode;
  if (ms == "center") mode = StraightenMode::Center;
  else if (ms == "multiplier") mode = StraightenMode::Multiplier;
  else if (ms == "neutral") mode = StraightenMode::Neutral;
  else fail(Errc::Validation, "unknown straighten mode: " + ms);
  StraighteningDiagnostic d =
      straightening_check(w, get_cplx(config.at("zeta")), mode,
                          config.value("model_period", 0),
                          config.value("theta", 0.0));
  json art = straightening_artifact(w, d);
  if (config.contains("out"))
    write_json_file(art, config.at("out").get<std::string>());
  return art;
}

json verb_embed_sample(const json& config) {
  validate_keys(config,
                {"family", "windows", "model_input", "max_sweeps", "out",
                 "seed", "threads", "tolerances"},
                {"family", "windows", "model_input"}, "embed-sample");
  Family fam = get_family(config);
  Tols tols = parse_tols(config);
  std::vector<RenormWindow> windows;
  for (const auto& wj : config.at("windows"))
    windows.push_back(window_from_artifact(load_doc(wj)));
  EmbeddingConfig cfg;
  cfg.tol = tols.embed_tol;
  cfg.max_sweeps = config.value("max_sweeps", 100);
  cfg.retry_seed = get_seed(config);
  ProductEmbeddingSample s = product_embedding_sample(
      fam, windows, cvec_from_json(config.at("model_input")), cfg);
  json art = embedding_artifact(fam, windows, s);
  if (config.contains("out"))
    write_json_file(art, config.at("out").get<std::string>());
  return art;
}

json verb_boxdim(const json& config) {
  validate_keys(config,
                {"grid", "min_scales", "threshold", "out", "seed", "threads",
                 "tolerances"},
                {"grid"}, "boxdim");
  GridField g = grid_read(config.at("grid").get<std::string>());
  double thr = config.value("threshold", 0.5);
  for (double& v : g.values) v = v > thr ? 1.0 : 0.0;
  BoxDimEstimate est = boxdim(g, config.value("min_scales", 4));
  json result = {{"verb", "boxdim"},
                 {"dimension", est.dimension},
                 {"r2", est.r2},
                 {"log_inv_eps", est.log_inv_eps},
                 {"log_count", est.log_count}};
  if (config.contains("out"))
    write_json_file(result, config.at("out").get<std::string>());
  return result;
}

json verb_experiment(const json& config) {
  validate_keys(config,
                {"name", "family", "certificate", "neutral",
                 "period_candidates", "thetas", "radii", "n_seeds",
                 "max_preperiod", "max_period", "chart", "window",
                 "resolution", "density_res", "mass_ratio", "depth", "out",
                 "seed", "threads", "tolerances"},
                {"name"}, "experiment");
  std::string name = config.at("name").get<std::string>();
  DensityExperimentConfig dcfg;
  if (config.contains("radii"))
    dcfg.radii = config.at("radii").get<std::vector<double>>();
  dcfg.n_seeds = config.value("n_seeds", 256);
  dcfg.seed = get_seed(config);

  json result;
  if (name == "prerep_to_neutral") {
    Family fam = get_family(config);
    json doc = load_doc(config.at("certificate"));
    MisiurewiczCertificate cert = misiurewicz_from_artifact(doc);
    std::vector<std::vector<int>> candidates =
        config.at("period_candidates").get<std::vector<std::vector<int>>>();
    std::vector<double> thetas =
        config.at("thetas").get<std::vector<double>>();
    result = density_report_artifact(experiment_prerep_to_neutral(
        fam, cert, candidates, thetas, dcfg));
  } else if (name == "neutral_to_prerep") {
    Family fam = get_family(config);
    json doc = load_doc(config.at("neutral"));
    NeutralSolution sol = neutral_from_artifact(doc);
    result = density_report_artifact(experiment_neutral_to_prerep(
        fam, sol, config.value("max_preperiod", 4),
        config.value("max_period", 3), dcfg));
  } else if (name == "stratification") {
    Family fam = get_family(config);
    StratificationConfig scfg;
    scfg.resolution = config.value("resolution", 16);
    scfg.density_res = config.value("density_res", 48);
    scfg.mass_ratio = config.value("mass_ratio", 1e-2);
    scfg.depth = config.value("depth", 200);
    result = stratification_artifact(experiment_stratification(
        fam, get_chart(config.at("chart")), get_box(config.at("window")),
        scfg));
  } else {
    fail(Errc::Validation, "unknown experiment: " + name);
  }
  if (config.contains("out"))
    write_json_file(result, config.at("out").get<std::string>());
  return result;
}

json verb_verify(const json& config) {
  validate_keys(config, {"artifact", "out", "seed", "threads", "tolerances"},
                {"artifact"}, "verify");
  json doc = load_doc(config.at("artifact"));
  VerifyReport rep = verify_artifact(doc);
  json result = {{"verb", "verify"},
                 {"pass", rep.pass},
                 {"checks", rep.checks},
                 {"failures", rep.failures}};
  if (config.contains("out"))
    write_json_file(result, config.at("out").get<std::string>());
  return result;
}

}  // namespace

json run_verb(const std::string& verb, const json& config) {
  if (verb == "render") return verb_render(config);
  if (verb == "solve-per") return verb_solve_per(config);
  if (verb == "continue-per") return verb_continue_per(config);
  if (verb == "solve-neutral") return verb_solve_neutral(config);
  if (verb == "find-misiurewicz") return verb_find_misiurewicz(config);
  if (verb == "find-window") return verb_find_window(config);
  if (verb == "baby-mandel") return verb_baby_mandel(config);
  if (verb == "straighten-check") return verb_straighten_check(config);
  if (verb == "embed-sample") return verb_embed_sample(config);
  if (verb == "boxdim") return verb_boxdim(config);
  if (verb == "experiment") return verb_experiment(config);
  if (verb == "verify") return verb_verify(config);
  fail(Errc::Validation, "unknown verb: " + verb);
}

}  // namespace biflab
