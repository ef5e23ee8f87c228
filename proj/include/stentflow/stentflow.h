#ifndef STENTFLOW_H
#define STENTFLOW_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

/* Status codes double as process exit codes for the command runners. */
typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_NUMERICAL = 1, /* solver, meshing or gate failure */
  SF_ERR_CONFIG = 2,    /* bad configuration or arguments */
  SF_ERR_INTERNAL = 3
} sf_status;

typedef struct sf_config sf_config;
typedef struct sf_constants sf_constants;

SF_API const char* sf_version(void);

/* Message of the last failed call on this thread; "" if none. */
SF_API const char* sf_last_error(void);
/* Stable error identifier of the last failure, e.g. "UnknownKey", "NonConvergence". */
SF_API const char* sf_last_error_kind(void);

/* Configuration: defaults, then a file or text in key = value form, then single overrides. */
SF_API sf_status sf_config_new(sf_config** out);
SF_API sf_status sf_config_load(const char* path, sf_config** out);
SF_API sf_status sf_config_parse(const char* text, sf_config** out);
SF_API sf_status sf_config_set(sf_config* cfg, const char* key, const char* value);
SF_API uint64_t sf_config_hash(const sf_config* cfg);
/* Canonical key = value text; the string lives as long as the handle. */
SF_API const char* sf_config_text(const sf_config* cfg);
SF_API void sf_config_free(sf_config* cfg);

typedef struct sf_run_options {
  int threads;
  int skip_varkappa;
  int vtk;
  int dry_run;
} sf_run_options;

/* Runs "mesh", "cell", "solve", "homog" or "converge". The summary text is written to
   *summary (owned by the library, valid until the next call on this thread) when non-null. */
SF_API sf_status sf_run(const sf_config* cfg, const char* command, const sf_run_options* options,
                        const char** summary);

/* Homogenized constants from the cell problems of cfg, or from a constants file. */
SF_API sf_status sf_constants_compute(const sf_config* cfg, sf_constants** out);
SF_API sf_status sf_constants_load(const char* path, sf_constants** out);
/* Names: beta1_plus, beta1_minus, ups1_plus, ups1_minus, eta_jump, eta_plus, eta_minus. */
SF_API sf_status sf_constants_get(const sf_constants* c, const char* name, double* value);
SF_API void sf_constants_free(sf_constants* c);

/* Q = eps [p0](1/2) / [eta] for the flow data of cfg. */
SF_API sf_status sf_flowrate_formula(const sf_config* cfg, const sf_constants* c, double eps, double* q);

#ifdef __cplusplus
}
#endif

#endif
