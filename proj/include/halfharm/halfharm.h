// Copyright 2026 The halfharm Authors
//
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

/* C interface to the halfharm laboratory.  Objects are opaque handles owned
 * by the caller and released with the matching *_free function.  Every
 * function returning hh_status leaves a message for hh_last_error() on
 * failure; the message is per thread and valid until the next call. */

#ifndef HALFHARM_HALFHARM_H_
#define HALFHARM_HALFHARM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HH_API __declspec(dllexport)
#else
#define HH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HH_OK = 0,
  HH_ERR_ARGUMENT = 1, /* null handle, bad shape or value */
  HH_ERR_CONFIG = 2,   /* config parse or validation error */
  HH_ERR_DOMAIN = 3,   /* point on a singular locus, refused assembly */
  HH_ERR_IO = 4,
  HH_ERR_NOT_FOUND = 5, /* unknown series, distribution or operator */
  HH_ERR_INTERNAL = 6
} hh_status;

typedef struct hh_config hh_config;
typedef struct hh_report hh_report;
typedef struct hh_field hh_field;

HH_API const char* hh_version(void);
HH_API const char* hh_last_error(void);
HH_API const char* hh_usage(void);

/* Configuration: key = value lines with [section] headers. */
HH_API hh_status hh_config_parse(const char* text, hh_config** out);
HH_API hh_status hh_config_load(const char* path, hh_config** out);
HH_API hh_config* hh_config_new(void);
/* key may be "section.key". */
HH_API hh_status hh_config_set(hh_config* config, const char* key, const char* value);
HH_API hh_status hh_config_get(const hh_config* config, const char* key, const char** value);
HH_API void hh_config_free(hh_config* config);

/* Runs the configured subcommand. */
HH_API hh_status hh_run(const hh_config* config, hh_report** out);
HH_API int hh_report_passed(const hh_report* report);
/* Full report including timing; the string is owned by the report. */
HH_API const char* hh_report_json(const hh_report* report);
/* Report without timing, byte-identical across runs with equal config and seed. */
HH_API const char* hh_report_payload(const hh_report* report);
/* Per-diagnostic access.  passed is 1 or 0; asserted is 0 for report-only
 * checks.  values is compact JSON, owned by the report. */
HH_API int hh_report_diagnostic_count(const hh_report* report);
HH_API hh_status hh_report_diagnostic(const hh_report* report, int index, const char** name,
                                      int* passed, int* asserted, double* seconds,
                                      const char** values);
/* Comma-separated names of the CSV series held by the report. */
HH_API const char* hh_report_series(const hh_report* report);
/* CSV text of one series, owned by the report. */
HH_API hh_status hh_report_series_csv(const hh_report* report, const char* kind, const char** csv);
/* Writes report.json and <series>.csv into dir. */
HH_API hh_status hh_report_write(const hh_report* report, const char* dir);
HH_API void hh_report_free(hh_report* report);

/* Bandlimited fields f(theta) = sum_{|n| <= N} c_n e^{in theta}, rows x cols
 * valued.  Modes n >= 0 are set; c_{-n} is the conjugate. */
HH_API hh_status hh_field_new(int rows, int cols, int N, hh_field** out);
HH_API hh_status hh_field_exhalf(hh_field** out);
HH_API hh_status hh_field_load(const char* path, hh_field** out);
HH_API hh_status hh_field_set_mode(hh_field* f, int component, int n, double re, double im);
HH_API hh_status hh_field_get_mode(const hh_field* f, int component, int n, double* re, double* im);
HH_API hh_status hh_field_shape(const hh_field* f, int* rows, int* cols, int* N);
/* op: "quarter", "riesz", "ddtheta", "half_laplacian". */
HH_API hh_status hh_field_apply(const hh_field* f, const char* op, hh_field** out);
/* Values at theta, rows*cols doubles in row-major order. */
HH_API hh_status hh_field_eval(const hh_field* f, double theta, double* values);
HH_API hh_status hh_field_l2_norm(const hh_field* f, double* out);
HH_API void hh_field_free(hh_field* f);

/* Half energy and |P_T(u)(-Delta)^{1/2} u| for a loop u and a named distribution. */
HH_API hh_status hh_half_energy(const hh_field* u, double* out);
HH_API hh_status hh_half_harmonic_residual(const hh_field* u, const char* distribution,
                                           double* out);

#ifdef __cplusplus
}
#endif

#endif /* HALFHARM_HALFHARM_H_ */
