// Command-line front end; all computation goes through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "biflab/biflab.h"

namespace {

struct VerbSpec {
  const char* name;
  const char* help;
};

const VerbSpec kVerbs[] = {
    {"render",
     "Render a 2d chart window: escape-time, activity, potential, or "
     "bifurcation-density grids (PNG + binary grid)."},
    {"solve-per", "Solve Per_n(w): a period-n cycle with multiplier w."},
    {"continue-per",
     "Continue a Per_n(e^{2 i pi theta}) solution along a theta path."},
    {"solve-neutral",
     "Solve for k distinct neutral cycles with prescribed multipliers."},
    {"find-misiurewicz",
     "Solve, sweep, or rescue Misiurewicz certificates (critical orbit "
     "collisions with repelling landing cycles and transversality data)."},
    {"find-window",
     "Fit a renormalization window (return time, affine chart, sup|h|) along "
     "a slice through a certificate."},
    {"baby-mandel", "Render the membership bitmap of a renormalized window."},
    {"straighten-check",
     "Straightening diagnostics against z^2 + zeta (center / multiplier / "
     "neutral modes)."},
    {"embed-sample",
     "Alternating-projection product-embedding sample for k windows."},
    {"boxdim", "Box-counting dimension of a stored 0/1 grid."},
    {"experiment",
     "Batch experiments: prerep_to_neutral, neutral_to_prerep, "
     "stratification."},
    {"verify", "Re-derive every invariant of a stored artifact from scratch."},
};

std::string read_config(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open config: " << path << "\n";
    std::exit(4);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string tolerance_footer() {
  std::string out =
      "\nTolerances (config key \"tolerances\", module-qualified names):\n";
  auto table = nlohmann::json::parse(biflab_tolerances_json());
  for (const auto& row : table) {
    out += "  " + row.at("name").get<std::string>() + " (default " +
           row.at("default").dump() + ", module " +
           row.at("module").get<std::string>() + "): " +
           row.at("doc").get<std::string>() + "\n";
  }
  out +=
      "\nEnvironment: BIFLAB_THREADS overrides the worker thread count.\n"
      "Exit codes: 0 success, 2 validation, 3 convergence failure, 4 I/O.\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biflab - a numerical laboratory for bifurcation currents, "
               "multiplier loci, Misiurewicz certificates, and "
               "renormalization windows in polynomial families"};
  app.footer(tolerance_footer());
  app.require_subcommand(1);

  std::string config_path;
  std::string selected;
  for (const auto& v : kVerbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("--config", config_path,
                    "JSON config file ('-' for stdin)")
        ->required();
    sub->footer(tolerance_footer());
    sub->callback([&selected, name = std::string(v.name)] { selected = name; });
  }

  CLI11_PARSE(app, argc, argv);

  std::string config = read_config(config_path);
  biflab_result* result = nullptr;
  int rc = biflab_run_verb(selected.c_str(), config.c_str(), &result);
  if (rc != 0) {
    std::cerr << "error (" << biflab_last_error_name()
              << "): " << biflab_last_error() << "\n";
    return rc;
  }
  std::cout << biflab_result_json(result);
  int exit_code = 0;
  if (selected == "verify") {
    auto doc = nlohmann::json::parse(biflab_result_json(result), nullptr,
                                     false);
    if (doc.is_discarded() || !doc.value("pass", false)) exit_code = 2;
  }
  biflab_result_free(result);
  return exit_code;
}
