#include "biflab/biflab.h"

#include <new>
#include <string>

#include "core/types.hpp"
#include "verbs.hpp"

struct biflab_result {
  std::string json;
};

namespace {
thread_local std::string g_last_error;
thread_local std::string g_last_error_name;

void set_error(biflab::Errc code, const std::string& what) {
  g_last_error = what;
  g_last_error_name = biflab::errc_name(code);
}
}  // namespace

extern "C" {

int biflab_run_verb(const char* verb, const char* config_json,
                    biflab_result** out) {
  if (out) *out = nullptr;
  if (!verb || !config_json || !out) {
    set_error(biflab::Errc::Validation, "null argument");
    return 2;
  }
  try {
    nlohmann::json config = nlohmann::json::parse(config_json, nullptr, false);
    if (config.is_discarded()) {
      set_error(biflab::Errc::Validation, "config is not valid JSON");
      return 2;
    }
    nlohmann::json result = biflab::run_verb(verb, config);
    *out = new biflab_result{result.dump(2) + "\n"};
    return 0;
  } catch (const biflab::Error& e) {
    set_error(e.code(), e.what());
    return biflab::exit_code_for(e.code());
  } catch (const std::bad_alloc&) {
    set_error(biflab::Errc::Io, "out of memory");
    return 4;
  } catch (const std::exception& e) {
    set_error(biflab::Errc::Validation, e.what());
    return 2;
  }
}

const char* biflab_result_json(const biflab_result* r) {
  return r ? r->json.c_str() : nullptr;
}

void biflab_result_free(biflab_result* r) { delete r; }

const char* biflab_last_error(void) { return g_last_error.c_str(); }

const char* biflab_last_error_name(void) { return g_last_error_name.c_str(); }

const char* biflab_tolerances_json(void) {
  static const std::string table = biflab::tolerance_table().dump(2);
  return table.c_str();
}

const char* biflab_version(void) { return "0.1.0"; }

}  // extern "C"
