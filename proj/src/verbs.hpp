#pragma once

#include <string>

#include "core/types.hpp"
#include "core/vendor_json.hpp"

namespace biflab {

/// Run one CLI verb on a JSON config document; returns the result document.
/// Configs are validated (unknown keys rejected) before any computation.
nlohmann::json run_verb(const std::string& verb, const nlohmann::json& config);

/// Process exit code for an error class: 2 validation, 3 convergence, 4 I/O.
int exit_code_for(Errc c);

/// Tolerance/default documentation table (name, default, consuming module),
/// one entry per configurable tolerance; surfaced by the CLI --help.
nlohmann::json tolerance_table();

}  // namespace biflab
