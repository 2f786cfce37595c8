// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// yieldrisk <verb> --config FILE [--out DIR] [--seed N] [--threads N]
// yieldrisk serve --data DIR [--host H] [--port P] [--static DIR]
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 config error.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yieldrisk/yieldrisk.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

yr_service* g_service = nullptr;

void on_signal(int) {
  if (g_service) yr_service_stop(g_service);
}

int report(yr_status status) {
  std::fprintf(stderr, "error (%s): %s\n", yr_status_name(status), yr_last_error());
  return status == YR_ERR_CONFIG ? kExitConfig : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"yieldrisk: crop-insurance yield-risk simulation"};
  app.set_version_flag("--version", std::string(yr_version()));
  app.require_subcommand(1);

  struct JobArgs {
    std::string config;
    std::string out;
    int64_t seed = -1;
    int threads = 0;
  };
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"generate", "write a synthetic dataset (and optionally a full fixture)"},
      {"ingest", "normalize yield and daily climate CSVs"},
      {"summarize", "per-neighborhood yield-delta summaries"},
      {"train", "train one regressor"},
      {"sweep", "hyperparameter sweep, leaderboard and retrained winner"},
      {"simulate", "Monte Carlo scenario runs"},
      {"compare", "SSP245 vs counterfactual with significance tests"},
  };
  std::vector<JobArgs> job_args(verbs.size());
  std::vector<CLI::App*> job_cmds;
  for (std::size_t i = 0; i < verbs.size(); ++i) {
    auto* cmd = app.add_subcommand(verbs[i].first, verbs[i].second);
    // Not ->required(): a missing --config is a config error (exit 3), not usage.
    cmd->add_option("-c,--config", job_args[i].config, "JSON config file");
    cmd->add_option("-o,--out", job_args[i].out, "output directory");
    cmd->add_option("--seed", job_args[i].seed, "override the config seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", job_args[i].threads, "worker threads")->check(CLI::PositiveNumber);
    if (verbs[i].first == "sweep") {
      cmd->add_option("--grid", job_args[i].config, "alias for --config");
    }
    job_cmds.push_back(cmd);
  }

  std::string data_dir, host = "127.0.0.1", static_dir;
  int port = 8080, trial_cap = 0, workers = 0;
  auto* serve = app.add_subcommand("serve", "serve the JSON API over HTTP");
  serve->add_option("-d,--data", data_dir, "directory of job outputs")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("-p,--port", port, "port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "directory served at /");
  serve->add_option("--trial-cap", trial_cap, "max trials per /api/simulate request");
  serve->add_option("--workers", workers, "concurrent simulations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  for (std::size_t i = 0; i < job_cmds.size(); ++i) {
    if (!job_cmds[i]->parsed()) continue;
    const auto& a = job_args[i];
    if (a.config.empty()) {
      std::fprintf(stderr, "error (config): %s needs --config FILE\n", verbs[i].first.c_str());
      return kExitConfig;
    }
    const uint64_t seed = static_cast<uint64_t>(a.seed);
    char* summary = nullptr;
    const auto status = yr_run_job(verbs[i].first.c_str(), a.config.c_str(),
                                   a.out.empty() ? nullptr : a.out.c_str(), a.seed >= 0 ? &seed : nullptr,
                                   a.threads, &summary);
    if (status != YR_OK) return report(status);
    std::printf("%s\n", summary);
    yr_string_free(summary);
    return 0;
  }

  yr_service* svc = nullptr;
  auto status = yr_service_create(data_dir.c_str(), trial_cap, workers,
                                  static_dir.empty() ? nullptr : static_dir.c_str(), &svc);
  if (status != YR_OK) return report(status);
  int bound = 0;
  status = yr_service_bind(svc, host.c_str(), port, &bound);
  if (status != YR_OK) {
    yr_service_free(svc);
    return report(status);
  }
  g_service = svc;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  status = yr_service_listen(svc);
  g_service = nullptr;
  yr_service_free(svc);
  return status == YR_OK ? 0 : report(status);
}
