// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON-over-HTTP service for scripts and the explorer UI.
//
//   GET  /api/meta                              versions, seeds, capabilities
//   GET  /api/neighborhoods?scenario=&year=     precomputed outcome rows
//   GET  /api/histogram?scenario=&year=         binned y_delta distribution
//   POST /api/simulate                          bounded on-demand simulation
//   POST /api/claims                            claim verdicts under both loss formulas
//   POST /api/sweep-surface                     leaderboard slices
//   POST /api/rates                             illustrative premium stub
//
// Responses depend only on the data directory and the request. Errors are
// {"error": message, "field": name-or-null} with 400 (malformed), 404
// (unknown scenario or missing artifact), 422 (trial cap exceeded) or 503
// (no model loaded).

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "yieldrisk/report_io.hpp"
#include "yieldrisk/sweep.hpp"

namespace yieldrisk {

inline constexpr int kDefaultTrialCap = 50000;

struct ServiceOptions {
  int trial_cap = kDefaultTrialCap;
  int default_trials = 2000;
  int workers = 2;           // concurrent simulation requests
  std::string static_dir;    // optional UI mount at "/"
};

struct ServiceData {
  std::optional<TrainedRegressor> model;
  std::vector<NeighborhoodSummary> summaries;
  ClimateBundle climate;
  std::vector<OutcomeRow> outcomes;
  std::vector<Histogram> histograms;
  std::vector<YearAggregate> aggregates;
  std::optional<SweepResult> leaderboard;
  nlohmann::json manifest = nlohmann::json::object();
};

/// Loads whichever of model.json, summaries.csv, climate.json, outcomes.csv,
/// histograms.csv, aggregates.csv, leaderboard.json and manifest.json exist.
/// Throws IoError if `dir` is not a directory.
ServiceData load_service_data(const std::string& dir);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  Service(ServiceData data, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Transport-free dispatch; the HTTP server routes every /api request here.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body) const;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  bool listen_after_bind();
  void stop();

  const ServiceOptions& options() const noexcept { return options_; }

 private:
  struct Impl;
  ServiceData data_;
  NeighborhoodHistory history_;
  ServiceOptions options_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace yieldrisk
