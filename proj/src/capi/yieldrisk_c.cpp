// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/yieldrisk.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <string>

#include "yieldrisk/coverage.hpp"
#include "yieldrisk/error.hpp"
#include "yieldrisk/geohash.hpp"
#include "yieldrisk/jobs.hpp"
#include "yieldrisk/regressor.hpp"
#include "yieldrisk/service.hpp"
#include "yieldrisk/stats.hpp"
#include "yieldrisk/version.hpp"

struct yr_model {
  yieldrisk::TrainedRegressor model;
};

struct yr_service {
  std::unique_ptr<yieldrisk::Service> service;
};

namespace {

thread_local std::string last_error;

yr_status fail(yr_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

yr_status invalid(const char* what) { return fail(YR_ERR_INVALID_ARGUMENT, what); }

// Runs fn, translating exceptions into status codes.
template <class Fn>
yr_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    last_error.clear();
    return YR_OK;
  } catch (const yieldrisk::Error& e) {
    return fail(static_cast<yr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(YR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(YR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(YR_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 && hex_value(s[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  while (!q.empty()) {
    const auto amp = q.find('&');
    const auto part = q.substr(0, amp);
    if (!part.empty()) {
      const auto eq = part.find('=');
      auto key = url_decode(part.substr(0, eq));
      auto value = eq == std::string_view::npos ? std::string() : url_decode(part.substr(eq + 1));
      out.emplace(std::move(key), std::move(value));
    }
    if (amp == std::string_view::npos) break;
    q.remove_prefix(amp + 1);
  }
  return out;
}

}  // namespace

extern "C" {

const char* yr_version(void) { return yieldrisk::kVersion; }

const char* yr_last_error(void) { return last_error.c_str(); }

const char* yr_status_name(yr_status status) {
  switch (status) {
    case YR_OK: return "ok";
    case YR_ERR_DOMAIN: return "domain";
    case YR_ERR_PARSE: return "parse";
    case YR_ERR_INGEST: return "ingest";
    case YR_ERR_MISSING_DATA: return "missing_data";
    case YR_ERR_SHAPE: return "shape";
    case YR_ERR_TRAINING_DIVERGENCE: return "training_divergence";
    case YR_ERR_SPLIT: return "split";
    case YR_ERR_CONFIG: return "config";
    case YR_ERR_COMPARISON: return "comparison";
    case YR_ERR_IO: return "io";
    case YR_ERR_SCHEMA: return "schema";
    case YR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case YR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void yr_string_free(char* s) { std::free(s); }

yr_status yr_yp_loss(double c_pct, double y_expected, double y_actual, double* loss, int* claim) {
  if (!loss) return invalid("loss must not be NULL");
  return guarded([&] {
    const auto r = yieldrisk::yp_loss(yieldrisk::CoveragePolicy::percent(c_pct), y_expected, y_actual);
    *loss = r.loss;
    if (claim) *claim = r.claim ? 1 : 0;
  });
}

yr_status yr_stddev_loss(double c_sigma, int as_printed_ratio, double y_mu, double y_sigma,
                         double y_actual, double* loss, int* claim) {
  if (!loss) return invalid("loss must not be NULL");
  return guarded([&] {
    const auto policy = yieldrisk::CoveragePolicy::std_dev(
        c_sigma, as_printed_ratio ? yieldrisk::SigmaFormula::AsPrintedRatio
                                  : yieldrisk::SigmaFormula::MeanMinusSigmas);
    const auto r = yieldrisk::stddev_loss(policy, y_mu, y_sigma, y_actual);
    *loss = r.loss;
    if (claim) *claim = r.claim ? 1 : 0;
  });
}

int yr_claims_indicator(double y_delta_pct, double c_pct) {
  return yieldrisk::claims_indicator(y_delta_pct, c_pct) ? 1 : 0;
}

yr_status yr_calibrate_c_sigma(double target_c_pct, double mean, double std_dev, double* c_sigma) {
  if (!c_sigma) return invalid("c_sigma must not be NULL");
  return guarded([&] { *c_sigma = yieldrisk::calibrate_c_sigma(target_c_pct, mean, std_dev); });
}

yr_status yr_geohash_encode(double lat, double lon, int precision, char* out, size_t out_size) {
  if (!out) return invalid("out must not be NULL");
  if (precision < 1 || static_cast<size_t>(precision) >= out_size) {
    return invalid("out_size must exceed precision, and precision must be >= 1");
  }
  return guarded([&] {
    const auto g = yieldrisk::encode_geohash(lat, lon, precision);
    std::memcpy(out, g.code().c_str(), g.code().size() + 1);
  });
}

yr_status yr_geohash_decode(const char* code, double bounds[4]) {
  if (!code || !bounds) return invalid("code and bounds must not be NULL");
  return guarded([&] {
    const auto b = yieldrisk::decode_bounds(yieldrisk::Geohash(code));
    bounds[0] = b.lat_min;
    bounds[1] = b.lat_max;
    bounds[2] = b.lon_min;
    bounds[3] = b.lon_max;
  });
}

yr_status yr_mann_whitney_u(const double* a, size_t na, const double* b, size_t nb, double* u,
                            double* p_value) {
  if ((!a && na) || (!b && nb)) return invalid("sample pointer is NULL");
  if (!p_value) return invalid("p_value must not be NULL");
  return guarded([&] {
    const auto r = yieldrisk::stats::mann_whitney_u({a, na}, {b, nb});
    if (u) *u = r.u_statistic;
    *p_value = r.p_value;
  });
}

yr_status yr_model_load(const char* path, yr_model** out) {
  if (!path || !out) return invalid("path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new yr_model{yieldrisk::load_model_file(path)}; });
}

size_t yr_model_input_size(const yr_model* model) {
  return model ? model->model.network().input_size() : 0;
}

yr_status yr_model_predict(const yr_model* model, const double* inputs, size_t rows,
                           double* mean_out, double* std_out) {
  if (!model || (!inputs && rows) || (!mean_out && rows) || (!std_out && rows)) {
    return invalid("model, inputs and outputs must not be NULL");
  }
  return guarded([&] {
    const auto width = static_cast<size_t>(model->model.network().input_size());
    for (size_t r = 0; r < rows; ++r) {
      const auto p = model->model.predict(std::span<const double>(inputs + r * width, width));
      mean_out[r] = p.mean_pred;
      std_out[r] = p.std_pred;
    }
  });
}

void yr_model_free(yr_model* model) { delete model; }

yr_status yr_run_job(const char* verb, const char* config_path, const char* output_dir,
                     const uint64_t* seed, int threads, char** summary_json) {
  if (!verb || !config_path) return invalid("verb and config_path must not be NULL");
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    yieldrisk::JobRequest req;
    req.verb = verb;
    req.config_path = config_path;
    if (output_dir) req.output_dir = output_dir;
    if (seed) req.seed = *seed;
    if (threads > 0) req.threads = threads;
    const auto result = yieldrisk::run_job(req);
    if (summary_json) {
      nlohmann::json j = {{"output_dir", result.output_dir},
                          {"outputs", result.outputs},
                          {"manifest", result.manifest_path},
                          {"summary", result.summary}};
      *summary_json = dup_string(j.dump());
    }
  });
}

yr_status yr_service_create(const char* data_dir, int trial_cap, int workers,
                            const char* static_dir, yr_service** out) {
  if (!data_dir || !out) return invalid("data_dir and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    yieldrisk::ServiceOptions opts;
    if (trial_cap > 0) opts.trial_cap = trial_cap;
    if (workers > 0) opts.workers = workers;
    if (static_dir) opts.static_dir = static_dir;
    auto svc = std::make_unique<yieldrisk::Service>(yieldrisk::load_service_data(data_dir), opts);
    *out = new yr_service{std::move(svc)};
  });
}

yr_status yr_service_handle(const yr_service* service, const char* method, const char* path,
                            const char* query, const char* body, int* http_status,
                            char** response_body) {
  if (!service || !method || !path || !http_status || !response_body) {
    return invalid("service, method, path and outputs must not be NULL");
  }
  *response_body = nullptr;
  return guarded([&] {
    const auto r = service->service->handle(method, path, parse_query(query ? query : ""),
                                            body ? body : "");
    *http_status = r.status;
    *response_body = dup_string(r.body);
  });
}

yr_status yr_service_bind(yr_service* service, const char* host, int port, int* bound_port) {
  if (!service || !host) return invalid("service and host must not be NULL");
  if (port < 0 || port > 65535) return invalid("port out of range");
  return guarded([&] {
    const int p = service->service->bind(host, port);
    if (p < 0) throw yieldrisk::IoError("cannot bind " + std::string(host) + ":" + std::to_string(port));
    if (bound_port) *bound_port = p;
  });
}

yr_status yr_service_listen(yr_service* service) {
  if (!service) return invalid("service must not be NULL");
  return guarded([&] {
    if (!service->service->listen_after_bind()) throw yieldrisk::IoError("listen failed");
  });
}

void yr_service_stop(yr_service* service) {
  if (service) service->service->stop();
}

void yr_service_free(yr_service* service) { delete service; }

}  // extern "C"
