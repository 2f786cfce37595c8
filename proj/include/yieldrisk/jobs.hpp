// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pipeline verbs driven by JSON config files. Relative paths inside a config
// resolve against the config file's directory. Every verb writes
// manifest.json (verb, config hash, seed, versions, outputs) next to its
// outputs.
//
//   generate   synthetic yields.csv + climate.json (+ full fixture if "pipeline": true)
//   ingest     yields CSV + daily climate CSVs -> yields.csv + climate.json
//   summarize  yields -> summaries.csv / summaries.jsonl
//   train      one regressor config -> model.json
//   sweep      grid search -> leaderboard.{json,csv} + retrained winner model.json
//   simulate   scenario runs -> aggregates / outcomes / histograms
//   compare    SSP245 vs counterfactual reports with significance
//
// `serve` is not a batch job; see service.hpp.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace yieldrisk {

struct JobRequest {
  std::string verb;
  std::string config_path;
  std::string output_dir;         // empty: config "output_dir", else "out"
  std::optional<uint64_t> seed;   // overrides config "seed"
  std::optional<int> threads;     // overrides config "threads"
};

struct JobResult {
  std::string output_dir;
  std::vector<std::string> outputs;
  std::string manifest_path;
  nlohmann::json summary;
};

const std::vector<std::string>& job_verbs();

/// Throws ConfigError naming the path when the file is missing or not a JSON object.
nlohmann::json load_config(const std::string& path);

/// Hex FNV-1a of the canonical JSON dump.
std::string config_hash(const nlohmann::json& config);

JobResult run_job(const JobRequest& request);

/// Same as run_job, with the config already parsed. `base_dir` resolves relative paths.
JobResult run_job_config(const std::string& verb, nlohmann::json config, const std::string& base_dir,
                         const std::string& output_dir);

}  // namespace yieldrisk
