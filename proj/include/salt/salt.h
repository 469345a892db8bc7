// Copyright 2026 The SALT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the SALT library.
 *
 * All objects are opaque handles released with their matching *_free
 * function. Every fallible call returns a salt_status; on failure the
 * message is available from salt_last_error() on the same thread until the
 * next call. Functions that produce text copy it into a caller buffer: pass
 * buf = NULL to query the required size (including the terminating NUL)
 * through *needed. */

#ifndef SALT_SALT_H_
#define SALT_SALT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SALT_BUILDING_LIBRARY)
#define SALT_API __attribute__((visibility("default")))
#else
#define SALT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum salt_status {
    SALT_OK = 0,
    SALT_ERR_INVALID_ARGUMENT = 1, /* precondition or shape violation */
    SALT_ERR_PARSE = 2,            /* malformed CSV or JSON input */
    SALT_ERR_CONFIG = 3,           /* invalid or unknown configuration */
    SALT_ERR_REFUSED = 4,          /* request exceeds a size guard */
    SALT_ERR_IO = 5,               /* file could not be read or written */
    SALT_ERR_BUFFER_TOO_SMALL = 6,
    SALT_ERR_INTERNAL = 7
} salt_status;

typedef enum salt_norm { SALT_NORM_L2 = 0, SALT_NORM_LINF = 1 } salt_norm;
typedef enum salt_proj_mode { SALT_PROJ_EXACT_JACOBIAN = 0, SALT_PROJ_STRAIGHT_THROUGH = 1 } salt_proj_mode;

typedef struct salt_adv_config {
    double alpha;
    double epsilon;
    double eta;
    double sigma;
    int k_steps;
    salt_norm norm;
    salt_proj_mode proj_mode;
    double fd_radius_scale;
    int detach_clean;
} salt_adv_config;

typedef struct salt_model salt_model;
typedef struct salt_run salt_run;
typedef struct salt_gradcheck_report salt_gradcheck_report;
typedef struct salt_text salt_text; /* owned NUL-terminated string */

SALT_API const char* salt_version(void);
SALT_API const char* salt_status_string(salt_status status);
SALT_API const char* salt_last_error(void);

SALT_API void salt_adv_config_default(salt_adv_config* cfg);

SALT_API const char* salt_text_data(const salt_text* text);
SALT_API size_t salt_text_size(const salt_text* text);
SALT_API void salt_text_free(salt_text* text);

/* Models. layers lists widths from input to output; an output width of 1 is
 * a regression head. */
SALT_API salt_status salt_model_create(const size_t* layers, size_t n_layers, uint64_t seed, salt_model** out);
SALT_API salt_status salt_model_load(const char* path, salt_model** out);
SALT_API salt_status salt_model_save(const salt_model* model, const char* path);
SALT_API void salt_model_free(salt_model* model);
SALT_API salt_status salt_model_param_count(const salt_model* model, size_t* out);
SALT_API salt_status salt_model_output_dim(const salt_model* model, size_t* out);
SALT_API salt_status salt_model_get_params(const salt_model* model, double* out, size_t len);
SALT_API salt_status salt_model_set_params(salt_model* model, const double* values, size_t len);
/* inputs is n x d row-major; out receives n x output_dim values. */
SALT_API salt_status salt_model_forward(const salt_model* model, const double* inputs, size_t n, size_t d,
                                        double* out, size_t out_len);

/* Stackelberg gradient for one batch. Classification models read labels,
 * regression models read targets; the other may be NULL. Each output array
 * holds param_count values; leader and interaction may be NULL. */
SALT_API salt_status salt_stackelberg_gradient(const salt_model* model, const double* inputs, size_t n, size_t d,
                                               const int* labels, const double* targets, const salt_adv_config* cfg,
                                               uint64_t seed, int exact_second_order, double* total, double* leader,
                                               double* interaction, size_t len);

/* Training from a JSON config file. output_dir, when non-NULL, overrides the
 * config's output directory. */
SALT_API salt_status salt_train(const char* config_path, const char* output_dir, salt_run** out);
SALT_API void salt_run_free(salt_run* run);
SALT_API salt_status salt_run_epoch_count(const salt_run* run, size_t* out);
SALT_API salt_status salt_run_metrics_line(const salt_run* run, size_t epoch_index, char* buf, size_t len,
                                           size_t* needed);

/* Sweep over one axis (k_steps, epsilon or norm). values and seeds are comma
 * separated lists. threads <= 0 reads SALT_THREADS. Writes sweep.csv into
 * output_dir (or the config's output directory) and returns its text. */
SALT_API salt_status salt_sweep(const char* config_path, const char* axis, const char* values, const char* seeds,
                                int threads, const char* output_dir, salt_text** csv);

/* k = -1 cycles depths 1..3. */
SALT_API salt_status salt_gradcheck(int k, uint64_t seed, int instances, salt_gradcheck_report** out);
SALT_API void salt_gradcheck_free(salt_gradcheck_report* report);
SALT_API salt_status salt_gradcheck_passed(const salt_gradcheck_report* report, int* passed);
SALT_API salt_status salt_gradcheck_text(const salt_gradcheck_report* report, char* buf, size_t len, size_t* needed);

/* Reads a confidence,correct CSV and computes ECE. When out_csv is non-NULL
 * the reliability table is written there; *csv (optional) receives it too. */
SALT_API salt_status salt_calibrate(const char* predictions_csv, size_t bins, int equal_mass, const char* out_csv,
                                    double* ece, salt_text** csv);

#ifdef __cplusplus
}
#endif

#endif /* SALT_SALT_H_ */
