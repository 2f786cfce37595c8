// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/jobs.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "csv_util.hpp"
#include "yieldrisk/config_json.hpp"
#include "yieldrisk/error.hpp"
#include "yieldrisk/ingest.hpp"
#include "yieldrisk/report_io.hpp"
#include "yieldrisk/rng.hpp"
#include "yieldrisk/splits.hpp"
#include "yieldrisk/sweep.hpp"
#include "yieldrisk/version.hpp"

namespace yieldrisk {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex(stable_hash(bytes));
}

std::string input_path(const json& cfg, const char* key, const fs::path& base, bool required = true) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) {
    if (required) throw FieldError(key, "is required");
    return {};
  }
  if (!cfg.at(key).is_string()) throw FieldError(key, "must be a path string");
  return (base / cfg.at(key).get<std::string>()).string();
}

template <class T>
T value(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw FieldError(key, "has the wrong type");
  }
}

const json& section(const json& cfg, const char* key) {
  static const json empty = json::object();
  if (!cfg.contains(key)) return empty;
  if (!cfg.at(key).is_object()) throw FieldError(key, "must be an object");
  return cfg.at(key);
}

std::string write_text(const fs::path& dir, const std::string& name, const std::function<void(std::ostream&)>& body) {
  const auto path = (dir / name).string();
  auto out = detail::open_output(path);
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
  return path;
}

struct PipelineData {
  std::vector<UnitYieldRecord> yields;
  std::vector<NeighborhoodSummary> summaries;
  ClimateBundle climate;
  int history_window = 10;
};

PipelineData load_data(const json& cfg, const fs::path& base, bool need_yields = false) {
  PipelineData d;
  d.history_window = value(cfg, "history_window", 10);
  const auto summaries = input_path(cfg, "summaries_csv", base, false);
  const auto yields = input_path(cfg, "yields_csv", base, false);
  if (!yields.empty()) d.yields = ingest_yield_csv(yields);
  if (!summaries.empty()) {
    auto in = detail::open_input(summaries);
    d.summaries = read_summaries_csv(in);
  } else if (!d.yields.empty()) {
    d.summaries = summarize_records(d.yields, d.history_window, nullptr);
  } else {
    throw FieldError("summaries_csv", "one of summaries_csv or yields_csv is required");
  }
  if (need_yields && d.yields.empty()) throw FieldError("yields_csv", "is required for this sampler");
  d.climate = load_climate_bundle(input_path(cfg, "climate_json", base));
  return d;
}

const ScenarioSeries& historic_series(const ClimateBundle& bundle) {
  const auto* s = bundle.find(ScenarioId::Historic);
  if (!s) throw ConfigError("climate bundle has no historic series");
  return *s;
}

void write_model_outputs(const fs::path& dir, const TrainedRegressor& model, JobResult& result) {
  result.outputs.push_back(write_text(dir, "model.json", [&](std::ostream& s) { save_model(s, model); }));
  json metrics = json::object();
  for (const auto& [name, m] : model.metrics) {
    metrics[name] = {{"mae_mean", m.mae_mean}, {"mae_std", m.mae_std}, {"n", m.n}};
  }
  result.summary["metrics"] = metrics;
  result.summary["best_epoch"] = model.best_epoch;
  result.summary["config"] = model.config().label();
  result.outputs.push_back(write_text(dir, "metrics.json", [&](std::ostream& s) {
    s << json{{"config", model.config().label()}, {"best_epoch", model.best_epoch}, {"metrics", metrics}}.dump(2)
      << '\n';
  }));
}

// ---- verbs ----

void job_generate(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result);

void job_ingest(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result) {
  const auto yields = ingest_yield_csv(input_path(cfg, "yields_csv", base));
  const auto schema = feature_schema_from_json(cfg.contains("schema") ? cfg.at("schema") : json());
  const auto policy_name = value<std::string>(cfg, "missing_policy", "fail");
  if (policy_name != "fail" && policy_name != "sentinel" && policy_name != "impute") {
    throw FieldError("missing_policy", "must be fail, sentinel or impute");
  }
  const auto policy = policy_name == "fail" ? MissingPolicy::Fail : MissingPolicy::Sentinel;
  const auto ref_years = value<std::vector<int>>(cfg, "baseline_years", {});

  const auto& daily = section(cfg, "climate_daily");
  if (!daily.contains("historic")) throw FieldError("climate_daily", "needs a 'historic' entry");
  const auto historic_raw = ingest_climate_csv((base / daily.at("historic").get<std::string>()).string());
  std::vector<ClimateFeatureSet> absolute;
  for (const auto& [key, series] : historic_raw) {
    absolute.push_back(monthly_stats(Geohash(key.first), key.second, series, schema, policy));
  }
  const auto baseline = build_climate_baseline(absolute, ref_years);

  ClimateBundle bundle;
  bundle.schema = schema;
  for (const auto& [name, path] : daily.items()) {
    const auto id = scenario_from_string(name);
    const auto raw = id == ScenarioId::Historic ? historic_raw
                                                : ingest_climate_csv((base / path.get<std::string>()).string());
    ScenarioSeries series{id, {}};
    for (const auto& [key, days] : raw) {
      series.climate.push_back(summarize_climate(Geohash(key.first), key.second, days, schema, baseline, policy));
    }
    if (policy_name == "impute") impute_missing(series.climate);
    bundle.series.push_back(std::move(series));
  }
  std::sort(bundle.series.begin(), bundle.series.end(),
            [](const ScenarioSeries& a, const ScenarioSeries& b) { return a.id < b.id; });

  result.outputs.push_back(write_text(out, "yields.csv", [&](std::ostream& s) { write_yield_csv(s, yields); }));
  result.outputs.push_back(write_text(out, "climate.json", [&](std::ostream& s) { write_climate_bundle(s, bundle); }));
  result.summary["units"] = yields.size();
  result.summary["series"] = bundle.series.size();
}

void job_summarize(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result) {
  const auto yields = ingest_yield_csv(input_path(cfg, "yields_csv", base));
  const int window = value(cfg, "history_window", 10);
  if (window < 1) throw FieldError("history_window", "must be >= 1");
  std::vector<std::string> skipped;
  const auto summaries = summarize_records(yields, window, &skipped);
  std::size_t normal = 0;
  for (const auto& s : summaries) normal += s.approx_normal ? 1 : 0;
  result.outputs.push_back(write_text(out, "summaries.csv", [&](std::ostream& s) { write_summaries_csv(s, summaries); }));
  result.outputs.push_back(write_text(out, "summaries.jsonl", [&](std::ostream& s) { write_summaries_jsonl(s, summaries); }));
  result.summary["neighborhood_years"] = summaries.size();
  result.summary["approx_normal_fraction"] =
      summaries.empty() ? 0.0 : static_cast<double>(normal) / static_cast<double>(summaries.size());
  result.summary["skipped"] = skipped;
}

void job_train(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result) {
  const auto data = load_data(cfg, base);
  const auto ds = build_regression_dataset(data.summaries, historic_series(data.climate).climate, data.climate.schema);
  auto config = regressor_config_from_json(section(cfg, "model"));
  if (!section(cfg, "model").contains("seed")) config.seed = value<uint64_t>(cfg, "seed", 0);
  const auto options = train_options_from_json(section(cfg, "training"));
  const auto kind = split_kind_from_string(value<std::string>(cfg, "split", "temporal"));
  const auto split = make_split(SplitSpec::of_kind(kind, value<uint64_t>(cfg, "seed", 0)), ds.rows);

  auto model = train(config, data.climate.schema, split.train, split.validation, options);
  // Held-out residuals feed the simulation's uncertainty propagation.
  const auto& held = !split.test.empty() ? split.test : !split.validation.empty() ? split.validation : split.train;
  model.residuals = extract_residuals(model, held);
  if (!split.test.empty()) model.metrics.emplace_back("test", evaluate(model, split.test));
  write_model_outputs(out, model, result);
  result.summary["warnings"] = ds.warnings;
  result.summary["split"] = to_string(kind);
}

void job_sweep(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result, int threads) {
  const auto data = load_data(cfg, base);
  const auto ds = build_regression_dataset(data.summaries, historic_series(data.climate).climate, data.climate.schema);
  SweepGrid grid;
  if (cfg.contains("grid")) {
    const auto& g = cfg.at("grid");
    if (g.is_string()) {
      auto in = detail::open_input((base / g.get<std::string>()).string());
      grid = sweep_grid_from_json(std::string(std::istreambuf_iterator<char>(in), {}));
    } else {
      grid = sweep_grid_from_json(g.dump());
    }
  }
  if (cfg.contains("seed")) grid.seed = cfg.at("seed").get<uint64_t>();
  const auto options = train_options_from_json(section(cfg, "training"));
  const auto kind = split_kind_from_string(value<std::string>(cfg, "split", "sweep_temporal"));
  const auto split = make_split(SplitSpec::of_kind(kind, grid.seed), ds.rows);

  const auto sweep = run_sweep(grid, data.climate.schema, split, options, threads);
  result.outputs.push_back(write_text(out, "leaderboard.json", [&](std::ostream& s) { write_leaderboard_json(s, sweep); }));
  result.outputs.push_back(write_text(out, "leaderboard.csv", [&](std::ostream& s) { write_leaderboard_csv(s, sweep); }));
  result.summary["candidates"] = sweep.leaderboard.size();

  auto retrained = retrain_winner(sweep.winner(), data.climate.schema, split, options);
  const auto& held = !split.test.empty() ? split.test : split.validation;
  retrained.model.residuals = extract_residuals(retrained.model, held);
  write_model_outputs(out, retrained.model, result);
  result.summary["winner"] = sweep.winner().config.label();
  result.summary["test_mae_mean_before_retrain"] = retrained.test_before.mae_mean;
  result.summary["test_mae_mean_after_retrain"] = retrained.test_after.mae_mean;
}

struct SimulationSetup {
  TrainedRegressor model;
  PipelineData data;
  NeighborhoodHistory history;
  ScenarioSpec spec;
  std::vector<double> shape_pool;
};

SimulationSetup simulation_setup(const json& cfg, const fs::path& base, int threads) {
  SimulationSetup s;
  s.spec = scenario_spec_from_json(section(cfg, "simulation"), base.string());
  s.spec.seed = value<uint64_t>(cfg, "seed", s.spec.seed);
  if (threads > 0) s.spec.threads = threads;
  s.model = load_model_file(input_path(cfg, "model", base));
  s.data = load_data(cfg, base, s.spec.sampler == DeltaSampler::Bootstrap);
  s.history = NeighborhoodHistory(s.data.summaries);
  if (s.spec.sampler == DeltaSampler::Bootstrap) {
    s.shape_pool = standardized_delta_pool(s.data.yields, s.data.history_window);
  }
  if (s.model.residuals.mean_residuals.empty()) {
    throw ConfigError("model file carries no residual pools; retrain it with the train or sweep verb");
  }
  return s;
}

ScenarioRun run_named(const SimulationSetup& s, ScenarioId id) {
  const auto* series = s.data.climate.find(id);
  if (!series) throw FieldError("scenarios", "climate bundle has no series '" + std::string(to_string(id)) + "'");
  auto spec = s.spec;
  spec.scenario = id;
  return run_scenario(spec, s.model, *series, s.history, s.shape_pool);
}

void job_simulate(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result, int threads) {
  const auto setup = simulation_setup(cfg, base, threads);
  std::vector<std::string> names = value<std::vector<std::string>>(cfg, "scenarios", {});
  if (names.empty()) {
    for (const auto& s : setup.data.climate.series) {
      if (s.id != ScenarioId::Historic) names.emplace_back(to_string(s.id));
    }
  }
  std::vector<ScenarioRun> runs;
  for (const auto& n : names) runs.push_back(run_named(setup, scenario_from_string(n)));
  const auto files = render_runs(runs, out.string());
  result.outputs.insert(result.outputs.end(), files.files.begin(), files.files.end());
  json aggregates = json::array();
  for (const auto& r : runs)
    for (const auto& a : aggregate_outcomes(r.scenario, r.outcomes)) aggregates.push_back(to_json(a));
  result.summary["aggregates"] = aggregates;
}

void job_compare(const json& cfg, const fs::path& base, const fs::path& out, JobResult& result, int threads) {
  const auto setup = simulation_setup(cfg, base, threads);
  ComparisonOptions options;
  options.alpha = value(cfg, "alpha", options.alpha);
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw FieldError("alpha", "must be in (0, 1)");
  options.compare_on = compare_on_from_string(value<std::string>(cfg, "compare_on", "claims"));

  std::vector<std::pair<ScenarioId, ScenarioId>> pairs;
  if (cfg.contains("pairs")) {
    for (const auto& p : value<std::vector<std::vector<std::string>>>(cfg, "pairs", {})) {
      if (p.size() != 2) throw FieldError("pairs", "each pair needs [treatment, counterfactual]");
      pairs.emplace_back(scenario_from_string(p[0]), scenario_from_string(p[1]));
    }
  } else {
    for (auto id : {ScenarioId::Ssp245_2030, ScenarioId::Ssp245_2050}) {
      if (setup.data.climate.find(id) && setup.data.climate.find(counterfactual_of(id))) {
        pairs.emplace_back(id, counterfactual_of(id));
      }
    }
  }
  if (pairs.empty()) throw FieldError("pairs", "no scenario pairs to compare");

  std::vector<SimulationReport> reports;
  json summary = json::array();
  for (const auto& [t, c] : pairs) {
    reports.push_back(compare_scenarios(run_named(setup, t), run_named(setup, c), options));
    auto j = to_json(reports.back());
    j.erase("outcomes");
    summary.push_back(std::move(j));
  }
  const auto files = render_outputs(reports, out.string());
  result.outputs.insert(result.outputs.end(), files.files.begin(), files.files.end());
  result.summary["comparisons"] = summary;
}

void job_generate(const json& cfg, const fs::path& /*base*/, const fs::path& out, JobResult& result) {
  auto synth_cfg = section(cfg, "synthetic");
  if (cfg.contains("seed") && !synth_cfg.contains("seed")) synth_cfg["seed"] = cfg.at("seed");
  const auto ds = generate_synthetic(synthetic_config_from_json(synth_cfg));
  result.outputs.push_back(write_text(out, "yields.csv", [&](std::ostream& s) { write_yield_csv(s, ds.yields); }));
  result.outputs.push_back(write_text(out, "climate.json", [&](std::ostream& s) { write_climate_bundle(s, ds.climate); }));
  result.outputs.push_back(write_text(out, "truth.json", [&](std::ostream& s) {
    s << json{{"mean_coefficients", ds.truth.mean_coefficients},
              {"std_coefficients", ds.truth.std_coefficients},
              {"intercept", ds.truth.intercept},
              {"year_trend", ds.truth.year_trend},
              {"trend_reference_year", ds.truth.trend_reference_year},
              {"std_base", ds.truth.std_base}}
             .dump(2)
      << '\n';
  }));
  result.summary["units"] = ds.yields.size();

  if (!cfg.contains("pipeline")) return;
  // Full fixture: summaries, a sweep, the retrained winner and comparisons,
  // all in the same directory so `serve` can use it directly.
  const auto& p = section(cfg, "pipeline");
  const uint64_t seed = value<uint64_t>(cfg, "seed", 0);
  const std::string dir = out.string();
  run_job_config("summarize", {{"yields_csv", "yields.csv"}}, dir, dir);
  json sweep_cfg = {{"summaries_csv", "summaries.csv"}, {"climate_json", "climate.json"}, {"seed", seed}};
  sweep_cfg["grid"] = p.contains("grid") ? p.at("grid")
                                         : json{{"layer_counts", {1, 2}}, {"dropout", {0.0}}, {"l2", {0.0, 0.05}},
                                                {"attribute_drops", {"none"}}};
  if (p.contains("training")) sweep_cfg["training"] = p.at("training");
  run_job_config("sweep", sweep_cfg, dir, dir);
  json cmp = {{"model", "model.json"}, {"summaries_csv", "summaries.csv"}, {"climate_json", "climate.json"},
              {"seed", seed}, {"simulation", p.contains("simulation") ? p.at("simulation") : json{{"trials", 2000}}}};
  run_job_config("compare", cmp, dir, dir);
  for (const char* f : {"summaries.csv", "summaries.jsonl", "leaderboard.json", "leaderboard.csv", "model.json",
                        "metrics.json", "aggregates.csv", "aggregates.json", "outcomes.csv", "histograms.csv",
                        "comparison.json"}) {
    result.outputs.push_back((out / f).string());
  }
  result.summary["pipeline"] = true;
}

}  // namespace

const std::vector<std::string>& job_verbs() {
  static const std::vector<std::string> verbs = {"generate", "ingest",   "summarize", "train",
                                                 "sweep",    "simulate", "compare"};
  return verbs;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  try {
    auto j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string config_hash(const json& config) { return hex(stable_hash(config.dump())); }

JobResult run_job_config(const std::string& verb, json config, const std::string& base_dir,
                         const std::string& output_dir) {
  if (std::find(job_verbs().begin(), job_verbs().end(), verb) == job_verbs().end()) {
    throw ConfigError("unknown verb '" + verb + "'");
  }
  const fs::path base = base_dir.empty() ? fs::path(".") : fs::path(base_dir);
  const fs::path out = output_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory '" + out.string() + "'");

  JobResult result;
  result.output_dir = out.string();
  result.summary = json::object();
  const int threads = value(config, "threads", 1);
  try {
    if (verb == "generate") job_generate(config, base, out, result);
    else if (verb == "ingest") job_ingest(config, base, out, result);
    else if (verb == "summarize") job_summarize(config, base, out, result);
    else if (verb == "train") job_train(config, base, out, result);
    else if (verb == "sweep") job_sweep(config, base, out, result, threads);
    else if (verb == "simulate") job_simulate(config, base, out, result, threads);
    else job_compare(config, base, out, result, threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  json outputs = json::array();
  for (const auto& f : result.outputs) {
    outputs.push_back({{"file", fs::path(f).filename().string()}, {"fnv1a", file_hash(f)}});
  }
  json manifest = {
      {"verb", verb},
      {"version", kVersion},
      {"api_schema_version", kApiSchemaVersion},
      {"config_hash", config_hash(config)},
      {"seed", value<uint64_t>(config, "seed", 0)},
      {"config", config},
      {"outputs", outputs},
      {"summary", result.summary},
      {"libraries",
       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  result.manifest_path = write_text(out, "manifest.json", [&](std::ostream& s) { s << manifest.dump(2) << '\n'; });
  return result;
}

JobResult run_job(const JobRequest& request) {
  auto config = load_config(request.config_path);
  if (request.seed) config["seed"] = *request.seed;
  if (request.threads) config["threads"] = *request.threads;
  std::string out = request.output_dir;
  if (out.empty()) out = config.contains("output_dir") ? config["output_dir"].get<std::string>() : "out";
  const auto base = fs::path(request.config_path).parent_path().string();
  if (fs::path(out).is_relative() && request.output_dir.empty()) out = (fs::path(base) / out).string();
  return run_job_config(request.verb, std::move(config), base, out);
}

}  // namespace yieldrisk
