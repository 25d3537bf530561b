/* C interface to the tempered random field library.
 *
 * Every fallible call returns a trf_status; on failure the message is
 * available from trf_last_error() on the same thread until the next call.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_destroy function. Strings returned through char** are released with
 * trf_string_free. Matrices are row-major. */
#ifndef TRF_TRF_H
#define TRF_TRF_H

#include <stddef.h>
#include <stdint.h>

#if defined(TRF_BUILDING_LIBRARY)
#define TRF_API __attribute__((visibility("default")))
#else
#define TRF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trf_status {
  TRF_OK = 0,
  TRF_INVALID_ARGUMENT = 1,
  TRF_SCHEMA = 2,
  TRF_EXISTENCE = 3,
  TRF_TOLERANCE = 4,
  TRF_IO = 5,
  TRF_NUMERICAL = 6, /* special-function domain error or failed convergence */
  TRF_SINGULAR = 7,  /* kernel evaluated at an integrable singularity */
  TRF_INTERNAL = 99
} trf_status;

typedef enum trf_iso_variant { TRF_ITOFBF = 0, TRF_IBTOFBF = 1 } trf_iso_variant;

typedef enum trf_cov_method {
  TRF_CLOSED_FORM = 0,
  TRF_SPECTRAL_INTEGRAL = 1,
  TRF_KERNEL_QUADRATURE = 2
} trf_cov_method;

typedef struct trf_isotropic_spec trf_isotropic_spec;
typedef struct trf_field_spec trf_field_spec;
typedef struct trf_realization trf_realization;

TRF_API const char* trf_version(void);
TRF_API const char* trf_last_error(void);
TRF_API const char* trf_status_name(trf_status status);
TRF_API void trf_string_free(char* s);
/* 0 selects the hardware concurrency. */
TRF_API void trf_set_threads(int threads);

/* ---- special functions ---- */
TRF_API trf_status trf_bessel_k(double nu, double u, double* out);
TRF_API trf_status trf_hyp2f1(double a, double b, double c, double z, double* out);
/* count symmetric alpha-stable variates with characteristic function exp(-|scale u|^alpha). */
TRF_API trf_status trf_sas_sample(double alpha, double scale, uint64_t seed, size_t count, double* out);

/* ---- isotropic Gaussian specs ---- */
/* h is n x n, row-major. */
TRF_API trf_status trf_isotropic_spec_create(trf_iso_variant variant, int d, int n, double lambda, const double* h,
                                             trf_isotropic_spec** out);
TRF_API trf_status trf_isotropic_spec_from_json(const char* json, trf_isotropic_spec** out);
TRF_API void trf_isotropic_spec_destroy(trf_isotropic_spec* spec);
TRF_API int trf_isotropic_spec_dim(const trf_isotropic_spec* spec);
TRF_API int trf_isotropic_spec_components(const trf_isotropic_spec* spec);
/* E[X(x) X(x2)^T] into out (n x n row-major); x and x2 have d entries. */
TRF_API trf_status trf_isotropic_cov(const trf_isotropic_spec* spec, trf_cov_method method, const double* x,
                                     const double* x2, double* out);

/* ---- general field specs ---- */
TRF_API trf_status trf_field_spec_from_json(const char* json, trf_field_spec** out);
TRF_API void trf_field_spec_destroy(trf_field_spec* spec);
/* Existence margins as a JSON object; *ok is 1 when every margin is positive. */
TRF_API trf_status trf_field_existence(const trf_field_spec* spec, int* ok, char** report_json);
/* Moving-average kernel (MA or MA_B flavor) at (x, y) into out (n x n). */
TRF_API trf_status trf_field_kernel(const trf_field_spec* spec, const double* x, const double* y, double* out);

/* ---- realizations ---- */
/* Exact Gaussian sample on the regular node grid lo..hi with count points per axis. */
TRF_API trf_status trf_simulate_exact(const trf_isotropic_spec* spec, trf_cov_method method, const double* lo,
                                      const double* hi, const int* count, uint64_t seed, trf_realization** out);
TRF_API trf_status trf_realization_load(const char* path, trf_realization** out);
TRF_API trf_status trf_realization_save(const trf_realization* r, const char* path);
TRF_API void trf_realization_destroy(trf_realization* r);
TRF_API size_t trf_realization_sites(const trf_realization* r);
TRF_API int trf_realization_components(const trf_realization* r);
TRF_API int trf_realization_dim(const trf_realization* r);
/* sites x n values, row-major; valid until the handle is destroyed. */
TRF_API const double* trf_realization_values(const trf_realization* r);

/* ---- runner ---- */
typedef struct trf_run_options {
  const char* config_path; /* recorded in the manifest; may be NULL */
  const char* out_dir;     /* overrides "out" when not NULL */
  int has_seed;
  uint64_t seed;          /* overrides "seed" when has_seed */
  double tolerance_scale; /* overrides "tolerance_scale" when > 0 */
  const char* command;    /* overrides "command" when not NULL */
} trf_run_options;

/* Runs a JSON config. The return value reports API misuse only; the run's
 * outcome is *exit_code (0 ok, 2 schema, 3 existence, 4 tolerance, 5 I/O).
 * *summary_json (may be NULL) receives {"exit_code", "message", "summary", "artifacts"}. */
TRF_API trf_status trf_run(const char* config_json, const trf_run_options* options, int* exit_code,
                           char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* TRF_TRF_H */
