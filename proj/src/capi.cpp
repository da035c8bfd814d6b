#include "coinclab/coinclab.h"

#include <cstring>
#include <string>

#include "coinclab/errors.hpp"
#include "coinclab/metrics.hpp"
#include "coinclab/pipeline.hpp"
#include "coinclab/run_config.hpp"
#include "coinclab/spdc_sim.hpp"

struct coinclab_config {
  coinclab::RunConfig config;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_timings = "{}";

coinclab_status fail(coinclab_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `f`, translating exceptions into status codes.
template <class F>
coinclab_status guarded(F&& f) noexcept {
  try {
    f();
    return COINCLAB_OK;
  } catch (const coinclab::ConfigError& e) {
    return fail(COINCLAB_ERR_CONFIG, e.what());
  } catch (const coinclab::FitError& e) {
    return fail(COINCLAB_ERR_FIT, e.what());
  } catch (const coinclab::IoError& e) {
    return fail(COINCLAB_ERR_IO, e.what());
  } catch (const coinclab::DomainError& e) {
    return fail(COINCLAB_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(COINCLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(COINCLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(COINCLAB_ERR_INTERNAL, "unknown error");
  }
}

coinclab_status null_argument(const char* what) {
  return fail(COINCLAB_ERR_CONFIG, std::string("null argument: ") + what);
}

coinclab::FrozenFits frozen_from(const char* path) {
  return path && *path ? coinclab::load_frozen_fits(path) : coinclab::FrozenFits{};
}

template <class Run>
coinclab_status run(const coinclab_config* config, Run&& body) {
  if (!config) return null_argument("config");
  return guarded([&] {
    coinclab::StageTimings timings;
    g_last_timings = "{}";
    try {
      body(timings);
    } catch (...) {
      g_last_timings = timings.to_json();
      throw;
    }
    g_last_timings = timings.to_json();
  });
}

template <class F>
coinclab_status formula(double* out, F&& f) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = f(); });
}

}  // namespace

extern "C" {

const char* coinclab_version(void) { return COINCLAB_VERSION; }

const char* coinclab_last_error(void) { return g_last_error.c_str(); }

coinclab_status coinclab_config_create(coinclab_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new coinclab_config{}; });
}

coinclab_status coinclab_config_clone(const coinclab_config* config, coinclab_config** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new coinclab_config{*config}; });
}

void coinclab_config_destroy(coinclab_config* config) { delete config; }

coinclab_status coinclab_config_load_file(coinclab_config* config, const char* path) {
  if (!config) return null_argument("config");
  if (!path) return null_argument("path");
  return guarded([&] { config->config.load_file(path); });
}

coinclab_status coinclab_config_load_text(coinclab_config* config, const char* text) {
  if (!config) return null_argument("config");
  if (!text) return null_argument("text");
  return guarded([&] { config->config.load_text(text); });
}

coinclab_status coinclab_config_set(coinclab_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key || !value) return null_argument("key/value");
  return guarded([&] { config->config.set(key, value); });
}

coinclab_status coinclab_config_get(const coinclab_config* config, const char* key, char* buf, size_t buf_size,
                                    size_t* needed) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  return guarded([&] {
    const std::string v = config->config.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && buf_size >= v.size() + 1) {
      std::memcpy(buf, v.c_str(), v.size() + 1);
    } else if (buf_size > 0 || buf) {
      throw coinclab::ConfigError("buffer too small for value of '" + std::string(key) + "'");
    }
  });
}

coinclab_status coinclab_config_apply_environment(coinclab_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] {
    if (const auto seed = coinclab::seed_from_environment()) config->config.seed = *seed;
  });
}

coinclab_status coinclab_config_validate(const coinclab_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { (void)config->config.resolved(); });
}

size_t coinclab_config_key_count(void) { return coinclab::config_keys().size(); }

// Registry strings are literals, hence NUL-terminated.
const char* coinclab_config_key_name(size_t index) {
  const auto& keys = coinclab::config_keys();
  return index < keys.size() ? keys[index].key.data() : nullptr;
}

const char* coinclab_config_key_help(size_t index) {
  const auto& keys = coinclab::config_keys();
  return index < keys.size() ? keys[index].help.data() : nullptr;
}

coinclab_status coinclab_run_simulate(const coinclab_config* config) {
  return run(config, [&](coinclab::StageTimings& t) { coinclab::run_simulate(config->config, &t); });
}

coinclab_status coinclab_run_pipeline(const coinclab_config* config, const char* freeze_fits_path) {
  return run(config, [&](coinclab::StageTimings& t) {
    coinclab::run_pipeline(config->config, frozen_from(freeze_fits_path), &t);
  });
}

coinclab_status coinclab_run_analyze(const coinclab_config* config, const char* events_path,
                                     const char* freeze_fits_path) {
  if (!events_path) return null_argument("events_path");
  return run(config, [&](coinclab::StageTimings& t) {
    coinclab::run_analyze(events_path, config->config, frozen_from(freeze_fits_path), &t);
  });
}

coinclab_status coinclab_run_sweep(const coinclab_config* config, const char* events_path,
                                   const char* freeze_fits_path) {
  if (!events_path) return null_argument("events_path");
  return run(config, [&](coinclab::StageTimings& t) {
    coinclab::run_sweep(events_path, config->config, frozen_from(freeze_fits_path), &t);
  });
}

coinclab_status coinclab_run_ygrid(const coinclab_config* config, const char* events_path,
                                   const char* freeze_fits_path) {
  return run(config, [&](coinclab::StageTimings& t) {
    coinclab::run_ygrid(events_path ? events_path : "", config->config, frozen_from(freeze_fits_path), &t);
  });
}

const char* coinclab_last_timings(void) { return g_last_timings.c_str(); }

coinclab_status coinclab_signal_wavelength(double pump_nm, double herald_nm, double* out_nm) {
  return formula(out_nm, [&] { return coinclab::signal_wavelength(pump_nm, herald_nm); });
}

coinclab_status coinclab_reconstruct_pump_wavelength(double herald_nm, double signal_nm, double* out_nm) {
  return formula(out_nm, [&] { return coinclab::reconstruct_pump_wavelength(herald_nm, signal_nm); });
}

coinclab_status coinclab_snr_from_sbr_change(double s, double b, double new_sbr, double* out_ratio) {
  return formula(out_ratio, [&] { return coinclab::snr_from_sbr_change(s, b, new_sbr); });
}

coinclab_status coinclab_photons_required_ratio(double snr_ratio, double* out_ratio) {
  return formula(out_ratio, [&] { return coinclab::photons_required_ratio(snr_ratio); });
}

coinclab_status coinclab_background_ratio_for_snr_gain(double sbr_factor, double snr_gain, double* out_ratio) {
  return formula(out_ratio, [&] { return coinclab::background_ratio_for_snr_gain(sbr_factor, snr_gain); });
}

}  // extern "C"
