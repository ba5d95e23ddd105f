/*
Copyright 2026 The gencs Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

/* C interface to the gencs library. Objects are opaque handles released with
 * the matching *_free function. Every call that can fail returns a
 * gencs_status; on failure gencs_last_error() holds a message for the
 * calling thread. JSON strings returned through char** out-parameters are
 * owned by the caller and released with gencs_string_free(). */

#ifndef GENCS_GENCS_H
#define GENCS_GENCS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GENCS_BUILDING_LIBRARY)
#define GENCS_API __declspec(dllexport)
#else
#define GENCS_API __declspec(dllimport)
#endif
#else
#define GENCS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gencs_status {
  GENCS_OK = 0,
  GENCS_E_INVALID_ARGUMENT = 1,
  GENCS_E_DIMENSION_MISMATCH = 2,
  GENCS_E_NON_FINITE = 3,
  GENCS_E_MALFORMED_FILE = 4,
  GENCS_E_DIMENSION_INCONSISTENCY = 5,
  GENCS_E_UNSUPPORTED_ACTIVATION = 6,
  GENCS_E_CHECKSUM_MISMATCH = 7,
  GENCS_E_IO = 8,
  GENCS_E_ALL_RESTARTS_FAILED = 9,
  GENCS_E_BUDGET_EXCEEDED = 10,
  GENCS_E_DEGENERATE_SAMPLE = 11,
  GENCS_E_MISSING_TRUTH = 12,
  GENCS_E_INTERNAL = 100
} gencs_status;

typedef struct gencs_net gencs_net;
typedef struct gencs_op gencs_op;
typedef struct gencs_observation gencs_observation;

GENCS_API const char* gencs_version(void);
/* Message of the last failed call on this thread ("" if none). */
GENCS_API const char* gencs_last_error(void);
GENCS_API const char* gencs_status_name(gencs_status status);
GENCS_API void gencs_string_free(char* s);

/* ---- generator networks (GENW) ---- */

GENCS_API gencs_status gencs_net_load(const char* path, gencs_net** out);
GENCS_API gencs_status gencs_net_save(const gencs_net* net, const char* path);
/* spec_json: {"k","n","depth","width","hidden","output","weight_scale","bias_scale"}; NULL for defaults. */
GENCS_API gencs_status gencs_net_random(const char* spec_json, uint64_t seed, gencs_net** out);
GENCS_API void gencs_net_free(gencs_net* net);
GENCS_API gencs_status gencs_net_dims(const gencs_net* net, size_t* k, size_t* n, size_t* depth);
GENCS_API gencs_status gencs_net_forward(const gencs_net* net, const double* z, size_t k, double* x, size_t n);
/* grad = J(z)^T cotangent */
GENCS_API gencs_status gencs_net_vjp(const gencs_net* net, const double* z, size_t k, const double* cotangent,
                                     size_t n, double* grad);
/* z ~ N(0, I) from the library's seeded generator. */
GENCS_API gencs_status gencs_latent_sample(uint64_t seed, double* z, size_t k);
/* {"per_layer": [...], "product": L, "uniform": L} */
GENCS_API gencs_status gencs_net_lipschitz(const gencs_net* net, char** json_out);

/* ---- measurement operators ---- */

/* m x n, entries N(0, 1/m) */
GENCS_API gencs_status gencs_op_gaussian(uint64_t seed, size_t m, size_t n, gencs_op** out);
GENCS_API gencs_status gencs_op_superres(size_t pool_h, size_t pool_w, size_t stride, size_t height, size_t width,
                                         size_t channels, gencs_op** out);
GENCS_API gencs_status gencs_op_identity(size_t n, gencs_op** out);
GENCS_API void gencs_op_free(gencs_op* op);
GENCS_API gencs_status gencs_op_dims(const gencs_op* op, size_t* m, size_t* n);
GENCS_API gencs_status gencs_op_apply(const gencs_op* op, const double* x, size_t n, double* y, size_t m);

/* ---- observations (GOBS) ---- */

/* y = A x + eta, eta ~ N(0, noise_level^2 / m) per coordinate. Keeps x as truth. */
GENCS_API gencs_status gencs_sense(const gencs_op* op, const double* x, size_t n, double noise_level,
                                   uint64_t noise_seed, gencs_observation** out);
GENCS_API gencs_status gencs_observation_load(const char* path, gencs_observation** out);
GENCS_API gencs_status gencs_observation_save(const gencs_observation* obs, const char* path);
GENCS_API void gencs_observation_free(gencs_observation* obs);
GENCS_API gencs_status gencs_observation_dims(const gencs_observation* obs, size_t* m, size_t* n);
GENCS_API gencs_status gencs_observation_y(const gencs_observation* obs, double* y, size_t m);

/* ---- recovery ---- */

/* config_json: recovery config (see docs/experiment.md), NULL for defaults.
 * Result: z_hat, x_hat, measurement_error, eps_hat, best_restart,
 * per_restart_trace, and a bound check when the observation carries truth. */
GENCS_API gencs_status gencs_recover(const gencs_net* net, const gencs_observation* obs, const char* config_json,
                                     char** result_json);
/* method: "lasso-pixel", "lasso-dct" or "lasso-db1". The image bases need
 * "height", "width" and optionally "channels" in config_json. */
GENCS_API gencs_status gencs_baseline(const gencs_observation* obs, const char* method, const char* config_json,
                                      char** result_json);

/* ---- S-REC and region counting ---- */

/* config_json: {"m_values","pairs","seeds","seed","latent_radius","workers"} */
GENCS_API gencs_status gencs_srec_sweep(const gencs_net* net, const char* config_json, char** report_json);
/* c random hyperplanes in R^k from seed; exact count, bound and recursion check. */
GENCS_API gencs_status gencs_count_regions_random(size_t k, size_t c, uint64_t seed, char** json_out);
/* normals: c x k row-major, offsets: c. Plane i is {x : normals_i . x + offsets_i = 0}. */
GENCS_API gencs_status gencs_count_regions(size_t k, size_t c, const double* normals, const double* offsets,
                                           char** json_out);
GENCS_API gencs_status gencs_net_count_regions(const gencs_net* net, char** json_out);

/* ---- experiments ---- */

/* Runs a JSON experiment file and writes raw.csv, agg.csv, timing.csv and
 * plots/ to its output_dir. Returns GENCS_OK when the file was runnable;
 * summary "all_ok" is false if any task recorded errors. */
GENCS_API gencs_status gencs_run_experiment(const char* spec_path, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* GENCS_GENCS_H */
