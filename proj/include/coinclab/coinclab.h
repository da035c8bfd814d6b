#ifndef COINCLAB_COINCLAB_H
#define COINCLAB_COINCLAB_H

/* C interface of the coinclab shared library.
 *
 * Every fallible function returns a coinclab_status; on failure the message
 * is available from coinclab_last_error() on the calling thread until the
 * next failing call on that thread. Handles are opaque and owned by the
 * caller (release with the matching _destroy function). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(COINCLAB_BUILDING_LIBRARY)
#    define COINCLAB_API __declspec(dllexport)
#  else
#    define COINCLAB_API __declspec(dllimport)
#  endif
#else
#  define COINCLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes of the command-line tool. */
typedef enum coinclab_status {
  COINCLAB_OK = 0,
  COINCLAB_ERR_INTERNAL = 1,
  COINCLAB_ERR_CONFIG = 2,  /* invalid configuration or argument */
  COINCLAB_ERR_FIT = 3,     /* a histogram fit did not converge */
  COINCLAB_ERR_IO = 4,      /* unreadable/unwritable file or malformed input */
  COINCLAB_ERR_DOMAIN = 5   /* argument outside a function's domain */
} coinclab_status;

typedef struct coinclab_config coinclab_config;

COINCLAB_API const char* coinclab_version(void);
COINCLAB_API const char* coinclab_last_error(void);

/* ---- configuration ---------------------------------------------------- */

COINCLAB_API coinclab_status coinclab_config_create(coinclab_config** out);
COINCLAB_API coinclab_status coinclab_config_clone(const coinclab_config* config, coinclab_config** out);
COINCLAB_API void coinclab_config_destroy(coinclab_config* config);

/* Applies a `key = value` file on top of the current values. */
COINCLAB_API coinclab_status coinclab_config_load_file(coinclab_config* config, const char* path);
COINCLAB_API coinclab_status coinclab_config_load_text(coinclab_config* config, const char* text);
COINCLAB_API coinclab_status coinclab_config_set(coinclab_config* config, const char* key, const char* value);

/* Copies the value (NUL-terminated) into buf when it fits; *needed receives
 * the required size including the terminator. buf may be NULL when
 * buf_size is 0. */
COINCLAB_API coinclab_status coinclab_config_get(const coinclab_config* config, const char* key, char* buf,
                                                 size_t buf_size, size_t* needed);

/* Applies COINCLAB_SEED from the environment, if set. */
COINCLAB_API coinclab_status coinclab_config_apply_environment(coinclab_config* config);

/* Resolves derived settings and validates without running anything. */
COINCLAB_API coinclab_status coinclab_config_validate(const coinclab_config* config);

/* Registry of configuration keys; pointers are static. */
COINCLAB_API size_t coinclab_config_key_count(void);
COINCLAB_API const char* coinclab_config_key_name(size_t index);
COINCLAB_API const char* coinclab_config_key_help(size_t index);

/* ---- runs ------------------------------------------------------------- */
/* Outputs go to the configuration's out.dir. freeze_fits_path may be NULL;
 * it names a JSON file with fixed "time"/"spectral" parameters or a previous
 * analysis.json. */

COINCLAB_API coinclab_status coinclab_run_simulate(const coinclab_config* config);
COINCLAB_API coinclab_status coinclab_run_pipeline(const coinclab_config* config, const char* freeze_fits_path);
COINCLAB_API coinclab_status coinclab_run_analyze(const coinclab_config* config, const char* events_path,
                                                  const char* freeze_fits_path);
COINCLAB_API coinclab_status coinclab_run_sweep(const coinclab_config* config, const char* events_path,
                                                const char* freeze_fits_path);
/* events_path may be NULL when freeze_fits_path holds both fits. */
COINCLAB_API coinclab_status coinclab_run_ygrid(const coinclab_config* config, const char* events_path,
                                                const char* freeze_fits_path);

/* JSON object of per-stage wall-clock seconds of the last run on this
 * thread ("{}" before any run). */
COINCLAB_API const char* coinclab_last_timings(void);

/* ---- formulas --------------------------------------------------------- */

/* lambda_h * lambda_p / (lambda_h - lambda_p); requires lambda_h > lambda_p > 0. */
COINCLAB_API coinclab_status coinclab_signal_wavelength(double pump_nm, double herald_nm, double* out_nm);
/* lambda_h * lambda_s / (lambda_h + lambda_s); requires positive inputs. */
COINCLAB_API coinclab_status coinclab_reconstruct_pump_wavelength(double herald_nm, double signal_nm,
                                                                  double* out_nm);
/* SNR ratio when the background changes to s / new_sbr at fixed s. */
COINCLAB_API coinclab_status coinclab_snr_from_sbr_change(double s, double b, double new_sbr, double* out_ratio);
/* 1 / snr_ratio^2. */
COINCLAB_API coinclab_status coinclab_photons_required_ratio(double snr_ratio, double* out_ratio);
/* b/s at which multiplying SBR by sbr_factor multiplies SNR by snr_gain. */
COINCLAB_API coinclab_status coinclab_background_ratio_for_snr_gain(double sbr_factor, double snr_gain,
                                                                    double* out_ratio);

#ifdef __cplusplus
}
#endif

#endif /* COINCLAB_COINCLAB_H */
