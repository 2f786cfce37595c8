// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/service.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <semaphore>

#include <httplib.h>

#include "yieldrisk/config_json.hpp"
#include "yieldrisk/coverage.hpp"
#include "yieldrisk/error.hpp"
#include "yieldrisk/ingest.hpp"
#include "yieldrisk/stats.hpp"
#include "yieldrisk/version.hpp"

namespace yieldrisk {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct HttpError {
  int status;
  std::string message;
  std::optional<std::string> field;
};

json error_body(const std::string& message, const std::optional<std::string>& field) {
  return {{"error", message}, {"field", field ? json(*field) : json(nullptr)}};
}

HttpResponse ok(const json& j) { return {200, j.dump(), "application/json"}; }

ScenarioId scenario_param(const std::string& name) {
  const auto id = try_scenario_from_string(name);
  if (!id) throw HttpError{404, "unknown scenario '" + name + "'", "scenario"};
  return *id;
}

std::optional<int> year_param(const std::map<std::string, std::string>& q) {
  const auto it = q.find("year");
  if (it == q.end() || it->second.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const int y = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return y;
  } catch (const std::exception&) {
    throw HttpError{400, "year must be an integer", "year"};
  }
}

json parse_body(const std::string& body) {
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw HttpError{400, "request body must be a JSON object", std::nullopt};
    return j;
  } catch (const json::exception& e) {
    throw HttpError{400, std::string("request body is not valid JSON: ") + e.what(), std::nullopt};
  }
}

template <class T>
T body_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FieldError(key, "has the wrong type");
  }
}

template <class T>
T required_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) throw FieldError(key, "is required");
  return body_field<T>(j, key, T{});
}

json verdict(const LossOutcome& o) {
  return {{"claim", o.claim}, {"loss", o.loss}, {"severity", o.severity}};
}

// Claim decisions for one year given the preceding yields (oldest first).
json claim_year(const std::vector<double>& history, double y_actual, const CoveragePolicy& pct,
                const CoveragePolicy& sigma) {
  const int window = pct.history_window;
  const auto n = std::min<std::size_t>(history.size(), static_cast<std::size_t>(window));
  const std::vector<double> recent(history.end() - static_cast<long>(n), history.end());
  const double expected = expected_yield(recent, window);
  double ss = 0.0;
  for (double v : recent) ss += (v - expected) * (v - expected);
  const double y_sigma = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  const double y_delta = compute_yield_delta(y_actual, expected);

  json out = {{"expected_yield", expected},
              {"y_sigma", y_sigma},
              {"y_actual", y_actual},
              {"y_delta", y_delta},
              {"guarantee", pct.c_pct * expected},
              {"percent", verdict(yp_loss(pct, expected, y_actual))}};
  try {
    auto s = verdict(stddev_loss(sigma, expected, y_sigma, y_actual));
    s["threshold"] = stddev_threshold(sigma, expected, y_sigma);
    out["sigma"] = s;
  } catch (const DomainError& e) {
    out["sigma"] = {{"error", e.what()}};
  }
  return out;
}

}  // namespace

struct Service::Impl {
  explicit Impl(int workers) : slots(std::max(1, workers)) {}
  httplib::Server server;
  mutable std::counting_semaphore<1024> slots;
};

ServiceData load_service_data(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("data directory '" + dir + "' does not exist");
  ServiceData d;
  const auto has = [&](const char* name) { return fs::exists(fs::path(dir) / name); };
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  const auto open = [&](const char* name) {
    std::ifstream in(path(name));
    if (!in) throw IoError("cannot open '" + path(name) + "'");
    return in;
  };
  if (has("model.json")) d.model = load_model_file(path("model.json"));
  if (has("summaries.csv")) {
    auto in = open("summaries.csv");
    d.summaries = read_summaries_csv(in);
  }
  if (has("climate.json")) d.climate = load_climate_bundle(path("climate.json"));
  if (has("outcomes.csv")) {
    auto in = open("outcomes.csv");
    d.outcomes = read_outcomes_csv(in);
  }
  if (has("histograms.csv")) {
    auto in = open("histograms.csv");
    d.histograms = read_histograms_csv(in);
  }
  if (has("aggregates.csv")) {
    auto in = open("aggregates.csv");
    d.aggregates = read_aggregates_csv(in);
  }
  if (has("leaderboard.json")) {
    auto in = open("leaderboard.json");
    d.leaderboard = read_leaderboard_json(in);
  }
  if (has("manifest.json")) {
    auto in = open("manifest.json");
    try {
      d.manifest = json::parse(in);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("manifest.json is not valid JSON: ") + e.what());
    }
  }
  return d;
}

Service::Service(ServiceData data, ServiceOptions options)
    : data_(std::move(data)), history_(data_.summaries), options_(std::move(options)),
      impl_(std::make_unique<Impl>(options_.workers)) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query(req.params.begin(), req.params.end());
    const auto r = handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get(R"(/api/.*)", route);
  impl_->server.Post(R"(/api/.*)", route);
  if (!options_.static_dir.empty()) impl_->server.set_mount_point("/", options_.static_dir);
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query,
                             const std::string& body) const {
  try {
    if (method == "GET" && path == "/api/meta") {
      json scenarios = json::array();
      for (const auto& s : data_.climate.series) scenarios.push_back(to_string(s.id));
      json outcome_scenarios = json::array();
      for (const auto& a : data_.aggregates) {
        const auto name = std::string(to_string(a.scenario));
        if (std::find(outcome_scenarios.begin(), outcome_scenarios.end(), name) == outcome_scenarios.end()) {
          outcome_scenarios.push_back(name);
        }
      }
      return ok({{"version", kVersion},
                 {"api_schema_version", kApiSchemaVersion},
                 {"httplib", CPPHTTPLIB_VERSION},
                 {"trial_cap", options_.trial_cap},
                 {"default_trials", options_.default_trials},
                 {"scenarios", scenarios},
                 {"outcome_scenarios", outcome_scenarios},
                 {"model", data_.model ? json(data_.model->config().label()) : json(nullptr)},
                 {"seed", data_.manifest.value("seed", json(nullptr))},
                 {"config_hash", data_.manifest.value("config_hash", json(nullptr))},
                 {"has_leaderboard", data_.leaderboard.has_value()},
                 {"neighborhoods", history_.geohashes().size()}});
    }

    if (method == "GET" && path == "/api/neighborhoods") {
      std::optional<ScenarioId> scenario;
      if (const auto it = query.find("scenario"); it != query.end() && !it->second.empty()) {
        scenario = scenario_param(it->second);
      }
      const auto year = year_param(query);
      json rows = json::array();
      for (const auto& r : data_.outcomes) {
        if (scenario && r.scenario != *scenario) continue;
        if (year && r.outcome.year != *year && aggregate_year(r.scenario, r.outcome.year) != *year) continue;
        rows.push_back(to_json(r));
      }
      return ok({{"count", rows.size()}, {"rows", rows}});
    }

    if (method == "GET" && path == "/api/histogram") {
      const auto it = query.find("scenario");
      if (it == query.end() || it->second.empty()) throw HttpError{400, "scenario is required", "scenario"};
      const auto scenario = scenario_param(it->second);
      const auto year = year_param(query);
      std::vector<const Histogram*> matches;
      for (const auto& h : data_.histograms) {
        if (h.scenario == scenario && (!year || h.year == *year)) matches.push_back(&h);
      }
      if (matches.empty()) throw HttpError{404, "no histogram for that scenario/year", std::nullopt};
      if (matches.size() > 1) throw HttpError{400, "several years available; pass year", "year"};
      return ok(to_json(*matches.front()));
    }

    if (method == "POST" && path == "/api/claims") {
      const auto j = parse_body(body);
      auto history = required_field<std::vector<double>>(j, "history");
      if (history.empty()) throw FieldError("history", "must be nonempty");
      for (double v : history) {
        if (!(v > 0.0) || !std::isfinite(v)) throw FieldError("history", "yields must be positive");
      }
      CoveragePolicy pct = CoveragePolicy::percent(body_field(j, "c_pct", 0.75),
                                                   body_field(j, "history_window", 10));
      CoveragePolicy sigma = CoveragePolicy::std_dev(body_field(j, "c_sigma", 2.11));
      sigma.sigma_formula = [&] {
        try {
          return sigma_formula_from_string(body_field<std::string>(j, "sigma_formula", "mean_minus_sigmas"));
        } catch (const Error& e) {
          throw FieldError("sigma_formula", e.what());
        }
      }();
      try {
        pct.validate();
        sigma.validate();
      } catch (const Error& e) {
        throw FieldError("c_pct", e.what());
      }

      json out = {{"c_pct", pct.c_pct}, {"c_sigma", sigma.c_sigma}, {"history_window", pct.history_window}};
      if (j.contains("y_actual")) {
        const double y = body_field(j, "y_actual", 0.0);
        if (!(y >= 0.0)) throw FieldError("y_actual", "must be >= 0");
        out["current"] = claim_year(history, y, pct, sigma);
      }
      // Optional forward series: each year is judged on the yields before it.
      json per_year = json::array();
      if (j.contains("series")) {
        if (!j.at("series").is_array()) throw FieldError("series", "must be an array");
        for (const auto& e : j.at("series")) {
          if (!e.is_object() || !e.contains("y_actual") || !e.at("y_actual").is_number()) {
            throw FieldError("series", "entries need a numeric y_actual");
          }
          const double y = e.at("y_actual").get<double>();
          if (!(y >= 0.0)) throw FieldError("series", "y_actual must be >= 0");
          auto v = claim_year(history, y, pct, sigma);
          if (e.contains("year")) v["year"] = e.at("year");
          per_year.push_back(std::move(v));
          if (y > 0.0) history.push_back(y);
        }
      }
      out["per_year"] = per_year;
      if (!j.contains("y_actual") && per_year.empty()) throw FieldError("y_actual", "is required");
      return ok(out);
    }

    if (method == "POST" && path == "/api/simulate") {
      const auto j = parse_body(body);
      const auto name = required_field<std::string>(j, "scenario");
      const auto scenario = scenario_param(name);
      const int trials = body_field(j, "trials", options_.default_trials);
      if (trials < 1) throw FieldError("trials", "must be >= 1");
      if (trials > options_.trial_cap) {
        throw HttpError{422, "trials " + std::to_string(trials) + " exceeds the cap of " +
                                 std::to_string(options_.trial_cap),
                        "trials"};
      }
      if (!data_.model) throw HttpError{503, "no model loaded in the data directory", std::nullopt};
      const auto* series = data_.climate.find(scenario);
      if (!series) throw HttpError{404, "no climate series for scenario '" + name + "'", "scenario"};

      json spec_json = j;
      spec_json.erase("scenario");
      auto spec = scenario_spec_from_json(spec_json);
      if (spec.sampler != DeltaSampler::Normal) throw FieldError("sampler", "only 'normal' is served");
      spec.threads = 1;
      spec.trials = trials;
      const auto only = body_field<std::vector<std::string>>(j, "geohashes", {});
      const bool compare = body_field(j, "compare", true) && scenario != ScenarioId::Historic &&
                           !is_counterfactual(scenario);
      ComparisonOptions cmp;
      cmp.alpha = body_field(j, "alpha", cmp.alpha);
      if (!(cmp.alpha > 0.0 && cmp.alpha < 1.0)) throw FieldError("alpha", "must be in (0, 1)");
      try {
        cmp.compare_on = compare_on_from_string(body_field<std::string>(j, "compare_on", "claims"));
      } catch (const Error& e) {
        throw FieldError("compare_on", e.what());
      }

      const auto inputs_for = [&](const ScenarioSeries& s) {
        auto inputs = predict_distributions(*data_.model, s, history_);
        if (!only.empty()) {
          std::erase_if(inputs, [&](const NeighborhoodInput& in) {
            return std::find(only.begin(), only.end(), in.geohash4.code()) == only.end();
          });
        }
        if (inputs.empty()) throw HttpError{404, "no matching neighborhoods", "geohashes"};
        return inputs;
      };

      impl_->slots.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{impl_->slots};

      spec.scenario = scenario;
      auto treatment = simulate_neighborhoods(spec, inputs_for(*series), data_.model->residuals);
      json out;
      if (compare) {
        const auto cf_id = counterfactual_of(scenario);
        const auto* cf_series = data_.climate.find(cf_id);
        if (!cf_series) throw HttpError{404, "no counterfactual series for '" + name + "'", "scenario"};
        spec.scenario = cf_id;
        const auto cf = simulate_neighborhoods(spec, inputs_for(*cf_series), data_.model->residuals);
        const auto report = compare_scenarios(treatment, cf, cmp);
        out = to_json(report);
        json hists = json::array();
        for (const auto& h : outcome_histograms(report.treatment, report.treatment_outcomes)) hists.push_back(to_json(h));
        for (const auto& h : outcome_histograms(report.counterfactual, report.counterfactual_outcomes)) hists.push_back(to_json(h));
        out["histograms"] = hists;
      } else {
        json aggregates = json::array(), rows = json::array(), hists = json::array();
        for (const auto& a : aggregate_outcomes(scenario, treatment.outcomes)) aggregates.push_back(to_json(a));
        for (const auto& r : outcome_rows(treatment)) rows.push_back(to_json(r));
        for (const auto& h : outcome_histograms(scenario, treatment.outcomes)) hists.push_back(to_json(h));
        out = {{"treatment", name}, {"aggregates", aggregates}, {"outcomes", rows}, {"histograms", hists}};
      }
      out["trials"] = trials;
      out["seed"] = spec.seed;
      out["coverage"] = coverage_to_json(spec.coverage);
      return ok(out);
    }

    if (method == "POST" && path == "/api/sweep-surface") {
      const auto j = parse_body(body);
      if (!data_.leaderboard) throw HttpError{404, "no leaderboard in the data directory", std::nullopt};
      const auto layers = body_field<std::vector<int>>(j, "layer_counts", {});
      const auto dropout = body_field<std::vector<double>>(j, "dropout", {});
      const auto l2 = body_field<std::vector<double>>(j, "l2", {});
      const auto attrs = body_field<std::vector<std::string>>(j, "attribute_drops", {});
      const auto limit = body_field<std::size_t>(j, "limit", 0);
      const auto in = [](const auto& menu, const auto& v) {
        return menu.empty() || std::find(menu.begin(), menu.end(), v) != menu.end();
      };
      json rows = json::array();
      for (const auto& e : data_.leaderboard->leaderboard) {
        const int n = static_cast<int>(e.config.layer_sizes.size());
        if (!in(layers, n) || !in(dropout, e.config.dropout) || !in(l2, e.config.l2) ||
            !in(attrs, e.config.dropped_attribute)) {
          continue;
        }
        rows.push_back({{"rank", e.rank},
                        {"layers", n},
                        {"layer_sizes", e.config.layer_sizes},
                        {"dropout", e.config.dropout},
                        {"l2", e.config.l2},
                        {"dropped_attribute", e.config.dropped_attribute},
                        {"val_mae_mean", e.validation.mae_mean},
                        {"val_mae_std", e.validation.mae_std},
                        {"train_mae_mean", e.train.mae_mean},
                        {"train_mae_std", e.train.mae_std},
                        {"parameters", e.parameters},
                        {"diverged", e.diverged}});
        if (limit && rows.size() >= limit) break;
      }
      return ok({{"count", rows.size()}, {"total", data_.leaderboard->leaderboard.size()}, {"rows", rows}});
    }

    if (method == "POST" && path == "/api/rates") {
      // Illustrative only: premium proxy is the expected per-unit covered loss
      // E[max(c - 1 - Y, 0)] for Y ~ Normal(mean, std), which rises with c.
      const auto j = parse_body(body);
      const auto levels = body_field<std::vector<double>>(j, "coverage_levels", {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85});
      const double mean = body_field(j, "mean", 0.0);
      const double sd = body_field(j, "std", 0.15);
      if (!(sd > 0.0)) throw FieldError("std", "must be > 0");
      json rows = json::array();
      for (double c : levels) {
        if (!(c > 0.0 && c <= 1.0)) throw FieldError("coverage_levels", "levels must be in (0, 1]");
        const double d = (c - 1.0 - mean) / sd;
        const double pdf = std::exp(-0.5 * d * d) / std::sqrt(2.0 * M_PI);
        const double expected_loss = (c - 1.0 - mean) * stats::normal_cdf(d) + sd * pdf;
        rows.push_back({{"c_pct", c},
                        {"loss_probability", stats::normal_cdf(d)},
                        {"premium_proxy", expected_loss}});
      }
      return ok({{"illustrative", true},
                 {"note", "stub formula; not an actuarial rate"},
                 {"mean", mean},
                 {"std", sd},
                 {"rows", rows}});
    }

    if (path.rfind("/api/", 0) == 0) throw HttpError{404, "no such endpoint: " + method + " " + path, std::nullopt};
    throw HttpError{404, "not found", std::nullopt};
  } catch (const HttpError& e) {
    return {e.status, error_body(e.message, e.field).dump()};
  } catch (const FieldError& e) {
    return {400, error_body(e.what(), e.field()).dump()};
  } catch (const ConfigError& e) {
    return {400, error_body(e.what(), std::nullopt).dump()};
  } catch (const DomainError& e) {
    return {400, error_body(e.what(), std::nullopt).dump()};
  } catch (const std::exception& e) {
    return {500, error_body(e.what(), std::nullopt).dump()};
  }
}

}  // namespace yieldrisk
