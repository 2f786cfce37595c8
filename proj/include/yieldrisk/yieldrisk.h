/* Copyright 2026 The yieldrisk Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the yieldrisk engine. Every fallible call returns a
 * yr_status; on failure yr_last_error() describes the problem (thread-local,
 * valid until the next call on the same thread). Strings handed out through
 * char** parameters must be released with yr_string_free. Handles are opaque
 * and released with their matching *_free function; passing NULL to a free
 * function is a no-op.
 */
#ifndef YIELDRISK_H_
#define YIELDRISK_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define YR_API __attribute__((visibility("default")))
#else
#define YR_API
#endif

typedef enum yr_status {
  YR_OK = 0,
  YR_ERR_DOMAIN = 1,
  YR_ERR_PARSE = 2,
  YR_ERR_INGEST = 3,
  YR_ERR_MISSING_DATA = 4,
  YR_ERR_SHAPE = 5,
  YR_ERR_TRAINING_DIVERGENCE = 6,
  YR_ERR_SPLIT = 7,
  YR_ERR_CONFIG = 8,
  YR_ERR_COMPARISON = 9,
  YR_ERR_IO = 10,
  YR_ERR_SCHEMA = 11,
  YR_ERR_INVALID_ARGUMENT = 100,
  YR_ERR_INTERNAL = 101
} yr_status;

YR_API const char* yr_version(void);
YR_API const char* yr_last_error(void);
YR_API const char* yr_status_name(yr_status status);
YR_API void yr_string_free(char* s);

/* ---- loss formulas ---- */

/* Percent-of-history loss: max(c_pct * y_expected - y_actual, 0). */
YR_API yr_status yr_yp_loss(double c_pct, double y_expected, double y_actual, double* loss,
                            int* claim);
/* Variance-based loss. as_printed_ratio selects c_sigma * y_mu / y_sigma as
 * the guarantee instead of y_mu - c_sigma * y_sigma. */
YR_API yr_status yr_stddev_loss(double c_sigma, int as_printed_ratio, double y_mu, double y_sigma,
                                double y_actual, double* loss, int* claim);
/* 1 iff y_delta_pct < c_pct - 1. */
YR_API int yr_claims_indicator(double y_delta_pct, double c_pct);
YR_API yr_status yr_calibrate_c_sigma(double target_c_pct, double mean, double std_dev,
                                      double* c_sigma);

/* ---- geohash ---- */

/* Writes precision chars plus NUL; out_size must be > precision. */
YR_API yr_status yr_geohash_encode(double lat, double lon, int precision, char* out,
                                   size_t out_size);
/* bounds = {lat_min, lat_max, lon_min, lon_max}. */
YR_API yr_status yr_geohash_decode(const char* code, double bounds[4]);

/* ---- statistics ---- */

/* Two-sided Mann-Whitney U; u is the statistic for sample a. */
YR_API yr_status yr_mann_whitney_u(const double* a, size_t na, const double* b, size_t nb,
                                   double* u, double* p_value);

/* ---- trained models ---- */

typedef struct yr_model yr_model;

YR_API yr_status yr_model_load(const char* path, yr_model** out);
YR_API size_t yr_model_input_size(const yr_model* model);
/* inputs holds rows * input_size values, row-major. */
YR_API yr_status yr_model_predict(const yr_model* model, const double* inputs, size_t rows,
                                  double* mean_out, double* std_out);
YR_API void yr_model_free(yr_model* model);

/* ---- batch jobs ---- */

/* Runs one pipeline verb. seed may be NULL; threads <= 0 keeps the config
 * value. summary_json (optional) receives the job summary as JSON. */
YR_API yr_status yr_run_job(const char* verb, const char* config_path, const char* output_dir,
                            const uint64_t* seed, int threads, char** summary_json);

/* ---- HTTP service ---- */

typedef struct yr_service yr_service;

/* trial_cap/workers <= 0 take defaults; static_dir may be NULL. */
YR_API yr_status yr_service_create(const char* data_dir, int trial_cap, int workers,
                                   const char* static_dir, yr_service** out);
/* Transport-free request; query is "a=1&b=2" (may be NULL). */
YR_API yr_status yr_service_handle(const yr_service* service, const char* method,
                                   const char* path, const char* query, const char* body,
                                   int* http_status, char** response_body);
/* port 0 picks a free port; bound_port receives the port. */
YR_API yr_status yr_service_bind(yr_service* service, const char* host, int port,
                                 int* bound_port);
/* Blocks until yr_service_stop. */
YR_API yr_status yr_service_listen(yr_service* service);
YR_API void yr_service_stop(yr_service* service);
YR_API void yr_service_free(yr_service* service);

#ifdef __cplusplus
}
#endif

#endif /* YIELDRISK_H_ */
