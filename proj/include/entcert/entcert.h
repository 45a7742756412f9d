// Copyright 2026 The entcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to entcert. Objects are opaque handles; every call returns an
 * entcert_status and leaves a message in entcert_last_error() on failure.
 * Strings returned through char** are owned by the caller and released with
 * entcert_string_free. */

#ifndef ENTCERT_ENTCERT_H_
#define ENTCERT_ENTCERT_H_

#include <stddef.h>

#if defined(_WIN32)
#define ENTCERT_API __declspec(dllexport)
#else
#define ENTCERT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum entcert_status {
  ENTCERT_OK = 0,
  ENTCERT_ERR_USAGE = 1,
  ENTCERT_ERR_DOMAIN = 2,
  ENTCERT_ERR_CONTRACT = 3,
  ENTCERT_ERR_NUMERIC = 4,
  ENTCERT_ERR_PARSE = 5,
  ENTCERT_ERR_ASSERTION = 6,
  ENTCERT_ERR_INTERNAL = 7
} entcert_status;

typedef struct entcert_report entcert_report;
typedef struct entcert_model entcert_model;

ENTCERT_API const char* entcert_version(void);
ENTCERT_API const char* entcert_status_name(entcert_status status);
/* Message for the last failed call on this thread; "" if none. */
ENTCERT_API const char* entcert_last_error(void);
/* 0 = use all hardware threads. */
ENTCERT_API void entcert_set_threads(unsigned threads);
ENTCERT_API void entcert_string_free(char* s);

/* Runs a YAML or JSON experiment config. A report is produced even when some
 * assertions fail; check entcert_report_passed. */
ENTCERT_API entcert_status entcert_run(const char* config_text,
                                       entcert_report** out);
ENTCERT_API const char* entcert_report_json(const entcert_report* r);
ENTCERT_API const char* entcert_report_timing_json(const entcert_report* r);
ENTCERT_API int entcert_report_passed(const entcert_report* r);
ENTCERT_API size_t entcert_report_failure_count(const entcert_report* r);
ENTCERT_API const char* entcert_report_failure(const entcert_report* r,
                                               size_t i);
ENTCERT_API void entcert_report_free(entcert_report* r);

/* descriptor_json: {"kind": "product", "n": 3, ...}. */
ENTCERT_API entcert_status entcert_model_build(const char* descriptor_json,
                                               int exact, entcert_model** out);
ENTCERT_API size_t entcert_model_states(const entcert_model* m);
ENTCERT_API size_t entcert_model_kernels(const entcert_model* m);
/* Label of state i, or NULL if out of range. */
ENTCERT_API const char* entcert_model_label(const entcert_model* m, size_t i);
/* Writes the kernel as a row-major states x states matrix. */
ENTCERT_API entcert_status entcert_model_kernel_dense(const entcert_model* m,
                                                      size_t k, double* out,
                                                      size_t out_len);
/* options_json may be NULL. kappa may be NULL. */
ENTCERT_API entcert_status entcert_model_certify(const entcert_model* m,
                                                 const char* options_json,
                                                 double* kappa,
                                                 char** report_json);
ENTCERT_API entcert_status entcert_model_estimate(const entcert_model* m,
                                                  const char* options_json,
                                                  double* rho,
                                                  char** report_json);
ENTCERT_API entcert_status entcert_model_duality(const entcert_model* m,
                                                 double kappa,
                                                 const char* options_json,
                                                 double* max_violation,
                                                 char** report_json);
ENTCERT_API void entcert_model_free(entcert_model* m);

/* request_json: {"dist": [[..]], "mu": [..], "nu": [..], "exact": bool,
 * "plans": bool}. */
ENTCERT_API entcert_status entcert_wasserstein(const char* request_json,
                                               char** result_json);
/* dist is row-major n x n. */
ENTCERT_API entcert_status entcert_w1_dense(size_t n, const double* dist,
                                            const double* mu, const double* nu,
                                            double* out);
ENTCERT_API entcert_status entcert_winf_dense(size_t n, const double* dist,
                                              const double* mu,
                                              const double* nu, double* out);
/* Least eigenvalue of I - P for the killed walk on a box; hop_weight < 0
 * selects 1/(2d). */
ENTCERT_API entcert_status entcert_lattice_delta(const size_t* dims,
                                                 size_t ndims,
                                                 double hop_weight,
                                                 double* delta,
                                                 double* closed_form);

#ifdef __cplusplus
}
#endif

#endif /* ENTCERT_ENTCERT_H_ */
