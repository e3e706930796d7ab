#ifndef COVCONV_COVCONV_H
#define COVCONV_COVCONV_H

/* C interface to the covconv library.
 *
 * Every function returns a covconv_status. On failure the message is
 * available from covconv_last_error() on the calling thread until the next
 * call. Strings returned through char** are owned by the caller and must be
 * released with covconv_string_free. Arrays are row-major doubles. */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(COVCONV_BUILDING_LIBRARY)
#    define COVCONV_API __declspec(dllexport)
#  else
#    define COVCONV_API __declspec(dllimport)
#  endif
#else
#  define COVCONV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum covconv_status {
  COVCONV_OK = 0,
  COVCONV_INVALID_ARGUMENT = 1,
  COVCONV_DOMAIN = 2,
  COVCONV_NUMERICAL = 3,
  COVCONV_CONFIG = 4,
  COVCONV_IO = 5,
  COVCONV_INTERNAL = 6
} covconv_status;

typedef struct covconv_manifold covconv_manifold;
typedef struct covconv_path covconv_path;

COVCONV_API const char* covconv_last_error(void);
COVCONV_API const char* covconv_status_name(covconv_status status);
COVCONV_API void covconv_string_free(char* s);

/* Manifolds. `params` may be NULL when n_params is 0. */
COVCONV_API covconv_status covconv_manifold_create(const char* preset, const double* params, size_t n_params,
                                                   covconv_manifold** out);
COVCONV_API void covconv_manifold_destroy(covconv_manifold* m);
COVCONV_API covconv_status covconv_manifold_dim(const covconv_manifold* m, int* dim);

/* g(x) into a d*d buffer. */
COVCONV_API covconv_status covconv_metric_at(const covconv_manifold* m, const double* x, double* g);
COVCONV_API covconv_status covconv_volume_density(const covconv_manifold* m, const double* x, double* out);
/* Gamma^l_{mn} at index (l*d + m)*d + n, d^3 entries. */
COVCONV_API covconv_status covconv_christoffel_at(const covconv_manifold* m, const double* x, double* gamma);

/* exp_x v with n_steps RK4 steps per unit parameter. */
COVCONV_API covconv_status covconv_exp_map(const covconv_manifold* m, const double* x, const double* v,
                                           int n_steps, double* out);

/* Paths: sampled geodesics or polylines in chart coordinates. */
COVCONV_API covconv_status covconv_geodesic(const covconv_manifold* m, const double* x, const double* v,
                                            int n_steps, covconv_path** out);
COVCONV_API covconv_status covconv_path_from_points(const double* points, size_t n_points, int dim,
                                                    covconv_path** out);
COVCONV_API covconv_status covconv_path_size(const covconv_path* p, size_t* n_samples, int* dim);
COVCONV_API covconv_status covconv_path_sample(const covconv_path* p, size_t i, double* out);
COVCONV_API void covconv_path_destroy(covconv_path* p);

/* Transports a tensor of rank (n_upper, n_lower) with d^(n_upper+n_lower)
 * components along the path. */
COVCONV_API covconv_status covconv_parallel_transport(const covconv_manifold* m, const covconv_path* p,
                                                      int n_upper, int n_lower, const double* components,
                                                      int steps_per_unit, double* out);

/* Config-driven entry points. `base_dir` resolves relative CSV paths and
 * may be NULL. */
COVCONV_API covconv_status covconv_run_check(const char* name, const char* config_json, const char* base_dir,
                                             char** report_json, int* passed);
COVCONV_API covconv_status covconv_convolve(const char* config_json, const char* base_dir, const char* csv_path,
                                            char** outputs_json);
COVCONV_API covconv_status covconv_decompose(int n, char** json);

#ifdef __cplusplus
}
#endif

#endif
