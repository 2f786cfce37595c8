// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/config_json.hpp"

#include <filesystem>

#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

using json = nlohmann::json;

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FieldError(key, "has the wrong type");
  }
}

template <class Fn>
auto checked(const char* key, Fn&& fn) {
  try {
    return fn();
  } catch (const FieldError&) {
    throw;
  } catch (const Error& e) {
    throw FieldError(key, e.what());
  }
}

}  // namespace

CoveragePolicy coverage_from_json(const json& j) {
  if (!j.is_null() && !j.is_object()) throw FieldError("coverage", "must be an object");
  CoveragePolicy c;
  const auto mode = field<std::string>(j, "mode", std::string(to_string(c.mode)));
  c.mode = checked("mode", [&] { return coverage_mode_from_string(mode); });
  c.c_pct = field(j, "c_pct", c.c_pct);
  c.c_sigma = field(j, "c_sigma", c.c_sigma);
  c.history_window = field(j, "history_window", c.history_window);
  const auto formula = field<std::string>(j, "sigma_formula", std::string(to_string(c.sigma_formula)));
  c.sigma_formula = checked("sigma_formula", [&] { return sigma_formula_from_string(formula); });
  if (!(c.c_pct > 0.0 && c.c_pct <= 1.0)) throw FieldError("c_pct", "must be in (0, 1]");
  if (!(c.c_sigma >= 0.0)) throw FieldError("c_sigma", "must be >= 0");
  if (c.history_window < 1) throw FieldError("history_window", "must be >= 1");
  return c;
}

json coverage_to_json(const CoveragePolicy& c) {
  return {{"mode", to_string(c.mode)},
          {"c_pct", c.c_pct},
          {"c_sigma", c.c_sigma},
          {"history_window", c.history_window},
          {"sigma_formula", to_string(c.sigma_formula)}};
}

ScenarioSpec scenario_spec_from_json(const json& j, const std::string& base_dir) {
  ScenarioSpec s;
  if (j.contains("coverage")) s.coverage = coverage_from_json(j.at("coverage"));
  s.trials = field(j, "trials", s.trials);
  if (s.trials < 1) throw FieldError("trials", "must be >= 1");
  const auto policy = field<std::string>(j, "unit_size_policy", std::string(to_string(s.unit_size_policy)));
  s.unit_size_policy = checked("unit_size_policy", [&] { return unit_size_policy_from_string(policy); });
  const auto table = field<std::string>(j, "unit_size_csv", "");
  if (!table.empty()) {
    const auto path = std::filesystem::path(base_dir) / table;
    s.size_table = checked("unit_size_csv", [&] { return UnitSizeTable::load_csv(path.string()); });
  }
  s.sample_granularity_km = field(j, "sample_granularity_km", s.sample_granularity_km);
  if (!(s.sample_granularity_km > 0.0)) throw FieldError("sample_granularity_km", "must be > 0");
  s.samples_per_unit = field(j, "samples_per_unit", s.samples_per_unit);
  if (s.samples_per_unit < 0) throw FieldError("samples_per_unit", "must be >= 0");
  const auto sampler = field<std::string>(j, "sampler", std::string(to_string(s.sampler)));
  s.sampler = checked("sampler", [&] { return delta_sampler_from_string(sampler); });
  s.seed = field<uint64_t>(j, "seed", s.seed);
  s.threads = field(j, "threads", s.threads);
  return s;
}

RegressorConfig regressor_config_from_json(const json& j) {
  RegressorConfig c;
  if (j.contains("layer_sizes")) {
    c.layer_sizes = field(j, "layer_sizes", c.layer_sizes);
  } else if (j.contains("layer_count")) {
    const int n = field(j, "layer_count", 3);
    c.layer_sizes = checked("layer_count", [&] { return RegressorConfig::layers_for_count(n); });
  }
  c.dropout = field(j, "dropout", c.dropout);
  c.l2 = field(j, "l2", c.l2);
  c.dropped_attribute = field(j, "dropped_attribute", c.dropped_attribute);
  c.seed = field<uint64_t>(j, "seed", c.seed);
  checked("model", [&] {
    c.validate();
    return 0;
  });
  return c;
}

TrainOptions train_options_from_json(const json& j) {
  TrainOptions o;
  o.max_epochs = field(j, "max_epochs", o.max_epochs);
  o.patience = field(j, "patience", o.patience);
  o.batch_size = field(j, "batch_size", o.batch_size);
  o.learning_rate = field(j, "learning_rate", o.learning_rate);
  o.weight_decay = field(j, "weight_decay", o.weight_decay);
  if (o.max_epochs < 1) throw FieldError("max_epochs", "must be >= 1");
  if (o.patience < 1) throw FieldError("patience", "must be >= 1");
  if (o.batch_size < 1) throw FieldError("batch_size", "must be >= 1");
  if (!(o.learning_rate > 0.0)) throw FieldError("learning_rate", "must be > 0");
  if (!(o.weight_decay >= 0.0)) throw FieldError("weight_decay", "must be >= 0");
  return o;
}

FeatureSchema feature_schema_from_json(const json& j) {
  FeatureSchema s = FeatureSchema::default_schema();
  if (j.is_null()) return s;
  if (j.contains("variables")) {
    s.variables.clear();
    for (const auto& name : field<std::vector<std::string>>(j, "variables", {})) {
      s.variables.push_back(checked("variables", [&] { return climate_variable_from_string(name); }));
    }
  }
  if (j.contains("months")) s.months = field<std::vector<int>>(j, "months", {});
  checked("schema", [&] {
    s.validate();
    return 0;
  });
  return s;
}

SyntheticConfig synthetic_config_from_json(const json& j) {
  SyntheticConfig c;
  c.n_neighborhoods = field(j, "n_neighborhoods", c.n_neighborhoods);
  c.first_year = field(j, "first_year", c.first_year);
  c.n_years = field(j, "n_years", c.n_years);
  c.seed = field<uint64_t>(j, "seed", c.seed);
  if (j.contains("schema")) c.schema = feature_schema_from_json(j.at("schema"));
  c.units_per_neighborhood = field(j, "units_per_neighborhood", c.units_per_neighborhood);
  c.noise_scale = field(j, "noise_scale", c.noise_scale);
  c.intercept = field(j, "intercept", c.intercept);
  c.year_trend = field(j, "year_trend", c.year_trend);
  c.std_base = field(j, "std_base", c.std_base);
  c.informative_features = field(j, "informative_features", c.informative_features);
  c.mean_effect = field(j, "mean_effect", c.mean_effect);
  c.std_effect = field(j, "std_effect", c.std_effect);
  c.warming_2030 = field(j, "warming_2030", c.warming_2030);
  c.warming_2050 = field(j, "warming_2050", c.warming_2050);
  checked("synthetic", [&] {
    c.validate();
    return 0;
  });
  return c;
}

}  // namespace yieldrisk
