// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "yieldrisk/error.hpp"
#include "yieldrisk/jobs.hpp"

using namespace yieldrisk;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("yieldrisk_jobs_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(YIELDRISK_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_SUITE("jobs") {

TEST_CASE("config loading errors name the file") {
  const auto d = scratch("config");
  try {
    load_config((d / "missing.json").string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
  }
  std::ofstream(d / "array.json") << "[1, 2]";
  CHECK_THROWS_AS(load_config((d / "array.json").string()), ConfigError);
  std::ofstream(d / "broken.json") << "{";
  CHECK_THROWS_AS(load_config((d / "broken.json").string()), ConfigError);
}

TEST_CASE("verbs and field errors") {
  const auto d = scratch("verbs");
  CHECK(job_verbs().size() == 7);
  CHECK_THROWS_AS(run_job_config("bake", json::object(), d.string(), d.string()), ConfigError);
  try {
    run_job_config("summarize", {{"yields_csv", 42}}, d.string(), d.string());
    FAIL("expected FieldError");
  } catch (const FieldError& e) {
    CHECK(e.field() == "yields_csv");
  }
  CHECK_THROWS_AS(run_job_config("train", json::object(), d.string(), d.string()), ConfigError);
}

TEST_CASE("config hash is canonical") {
  CHECK(config_hash(json::parse(R"({"a":1,"b":2})")) == config_hash(json::parse(R"({"b":2, "a":1})")));
  CHECK(config_hash({{"a", 1}}) != config_hash({{"a", 2}}));
}

TEST_CASE("generate writes data and a manifest") {
  const auto d = scratch("generate");
  const auto r = run_job_config("generate", {{"seed", 4}, {"synthetic", {{"n_neighborhoods", 3}, {"n_years", 12}}}},
                                d.string(), d.string());
  CHECK(fs::exists(d / "yields.csv"));
  CHECK(fs::exists(d / "climate.json"));
  const auto m = json::parse(slurp(r.manifest_path));
  CHECK(m["verb"] == "generate");
  CHECK(m["seed"] == 4);
  CHECK(m["outputs"].size() == r.outputs.size());
  CHECK_FALSE(m.contains("timestamp"));
  const auto again = run_job_config("generate", {{"seed", 4}, {"synthetic", {{"n_neighborhoods", 3}, {"n_years", 12}}}},
                                    d.string(), (d / "again").string());
  CHECK(slurp(d / "yields.csv") == slurp(d / "again" / "yields.csv"));
  CHECK(slurp(r.manifest_path) == slurp(again.manifest_path));
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  const auto d = scratch("cli_codes");
  const auto v = cli("--version", d);
  CHECK(v.code == 0);
  CHECK(v.out.find('.') != std::string::npos);
  const auto missing = cli("summarize --config " + (d / "nope.json").string(), d);
  CHECK(missing.code == 3);
  CHECK(missing.err.find("nope.json") != std::string::npos);
  CHECK(cli("summarize", d).code == 3);
  CHECK(cli("summarize --bogus-flag", d).code == 2);
  CHECK(cli("frobnicate", d).code == 2);
  CHECK(cli("", d).code == 2);
  write_json(d / "bad.json", {{"yields_csv", "does-not-exist.csv"}});
  const auto io = cli("summarize --config " + (d / "bad.json").string() + " --out " + (d / "o").string(), d);
  CHECK(io.code == 1);
  CHECK_FALSE(io.err.empty());
}

TEST_CASE("pipeline through the command line") {
  const auto d = scratch("cli_pipeline");
  write_json(d / "gen.json", {{"seed", 2}, {"synthetic", {{"n_neighborhoods", 6}, {"n_years", 18}, {"first_year", 1999}}}});
  REQUIRE(cli("generate -c " + (d / "gen.json").string() + " -o " + d.string(), d).code == 0);
  write_json(d / "sum.json", {{"yields_csv", "yields.csv"}});
  const auto s = cli("summarize -c " + (d / "sum.json").string() + " -o " + d.string(), d);
  REQUIRE(s.code == 0);
  CHECK(json::parse(s.out).contains("manifest"));

  write_json(d / "grid.json", {{"summaries_csv", "summaries.csv"},
                               {"climate_json", "climate.json"},
                               {"seed", 1},
                               {"training", {{"max_epochs", 10}}},
                               {"grid", {{"layer_counts", {1}}, {"dropout", {0.0}}, {"l2", {0.05}}, {"attribute_drops", {"none"}}}}});
  REQUIRE(cli("sweep --grid " + (d / "grid.json").string() + " -o " + d.string(), d).code == 0);
  const auto lb = json::parse(slurp(d / "leaderboard.json"));
  CHECK(lb["entries"].size() == 1);
  CHECK(fs::exists(d / "model.json"));

  write_json(d / "sim.json", {{"model", "model.json"},
                              {"summaries_csv", "summaries.csv"},
                              {"climate_json", "climate.json"},
                              {"scenarios", {"ssp245_2030"}},
                              {"simulation", {{"trials", 200}}}});
  const auto a = cli("simulate -c " + (d / "sim.json").string() + " -o " + (d / "a").string() + " --seed 9", d);
  const auto b = cli("simulate -c " + (d / "sim.json").string() + " -o " + (d / "b").string() + " --seed 9 --threads 2", d);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"aggregates.csv", "outcomes.csv", "histograms.csv"}) {
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
  }
  const auto c = cli("simulate -c " + (d / "sim.json").string() + " -o " + (d / "c").string() + " --seed 10", d);
  REQUIRE(c.code == 0);
  CHECK(slurp(d / "a" / "outcomes.csv") != slurp(d / "c" / "outcomes.csv"));
  CHECK(json::parse(slurp(d / "a" / "manifest.json"))["seed"] == 9);
}

}  // TEST_SUITE
