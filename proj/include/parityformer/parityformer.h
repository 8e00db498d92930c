/* SPDX-License-Identifier: Apache-2.0 */
#ifndef PARITYFORMER_H
#define PARITYFORMER_H

#include <stdint.h>

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * C interface to the parity transformer library.
 *
 * Every function returning pf_status leaves a message for the calling thread
 * in pf_last_error() when it fails. Strings handed out through char** must be
 * released with pf_string_free; handles with their matching destroy call.
 *
 * precision_bits selects the scalar backend: 0 or 53 evaluates in binary64,
 * anything else in software floating point with that many mantissa bits.
 */

typedef enum pf_status {
  PF_OK = 0,
  PF_ERROR_INVALID_ARGUMENT = 1,
  PF_ERROR_DIMENSION = 2,
  PF_ERROR_EMPTY_INPUT = 3,
  PF_ERROR_INDETERMINATE = 4,
  PF_ERROR_CONFIGURATION = 5,
  PF_ERROR_PARSE = 6,
  PF_ERROR_IO = 7,
  PF_ERROR_SEARCH_EXHAUSTED = 8,
  PF_ERROR_INTERNAL = 99
} pf_status;

typedef enum pf_decision { PF_REJECT = 0, PF_ACCEPT = 1 } pf_decision;

typedef struct pf_spec pf_spec;
typedef struct pf_report pf_report;

PF_API const char* pf_version(void);
PF_API const char* pf_last_error(void);
PF_API const char* pf_status_name(pf_status status);
PF_API void pf_string_free(char* text);

/* alpha is a decimal literal; NULL selects the default 0.01. */
PF_API pf_status pf_spec_build_parity(const char* alpha, pf_spec** out);
PF_API pf_status pf_spec_parse(const char* json_text, pf_spec** out);
PF_API pf_status pf_spec_load(const char* path, pf_spec** out);
PF_API pf_status pf_spec_to_json(const pf_spec* spec, char** out_json);
PF_API pf_status pf_spec_save(const pf_spec* spec, const char* path);
PF_API pf_status pf_spec_dim(const pf_spec* spec, uint32_t* out_dim);
PF_API void pf_spec_destroy(pf_spec* spec);

/* bits is a NUL-terminated string over {'0','1'}. */
PF_API pf_status pf_run(const pf_spec* spec, const char* bits, uint32_t precision_bits,
                        pf_decision* decision, double* margin);
PF_API pf_status pf_trace(const pf_spec* spec, const char* bits, uint32_t precision_bits,
                          char** out_json);

PF_API pf_status pf_verify_exhaustive(const pf_spec* spec, uint32_t max_n,
                                      uint32_t precision_bits, pf_report** out);
PF_API pf_status pf_verify_random(const pf_spec* spec, uint64_t count, uint64_t length,
                                  uint64_t seed, uint32_t precision_bits, pf_report** out);
PF_API pf_status pf_verify_equivalence(const pf_spec* spec, const char* bits, double tolerance,
                                       pf_report** out);

/* Coefficient separation audit for 2 <= n <= max_n. */
PF_API pf_status pf_audit(uint32_t max_n, const char* alpha, uint32_t precision_bits,
                          pf_report** out);
PF_API pf_status pf_margin_profile(uint64_t n, double temperature, double target,
                                   const char* alpha, pf_report** out);
PF_API pf_status pf_temperature(uint64_t n, const char* alpha, double* out);
PF_API pf_status pf_calibrate(uint64_t n, double target, const char* alpha,
                              double* calibrated, double* analytic);

PF_API int pf_report_passed(const pf_report* report);
PF_API const char* pf_report_text(const pf_report* report);
PF_API pf_status pf_report_json(const pf_report* report, char** out_json);
PF_API double pf_report_runtime(const pf_report* report);
PF_API void pf_report_destroy(pf_report* report);

#ifdef __cplusplus
}
#endif

#endif /* PARITYFORMER_H */
