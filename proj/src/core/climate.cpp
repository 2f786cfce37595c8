// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/climate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, 9> kVariableNames = {
    "precipitation", "tmin", "tmax", "rh_mean", "rh_peak",
    "heat_index",    "wet_bulb", "vpd", "svp",
};

constexpr std::array<std::string_view, 4> kStatNames = {"min", "max", "mean", "std"};

}  // namespace

std::string_view to_string(ClimateVariable v) noexcept {
  return kVariableNames[static_cast<std::size_t>(v)];
}

ClimateVariable climate_variable_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kVariableNames.size(); ++i) {
    if (kVariableNames[i] == name) return kAllClimateVariables[i];
  }
  throw ParseError("unknown climate variable '" + std::string(name) + "'");
}

std::string_view to_string(ClimateStat s) noexcept {
  return kStatNames[static_cast<std::size_t>(s)];
}

FeatureSchema FeatureSchema::default_schema() {
  FeatureSchema s;
  s.variables.assign(kAllClimateVariables.begin(), kAllClimateVariables.end());
  s.months = {4, 5, 6, 7, 8, 9};
  return s;
}

void FeatureSchema::validate() const {
  if (variables.empty()) throw ConfigError("feature schema has no climate variables");
  if (months.empty()) throw ConfigError("feature schema has no months");
  for (std::size_t i = 0; i < months.size(); ++i) {
    if (months[i] < 1 || months[i] > 12) throw ConfigError("schema month out of range 1..12");
    if (i > 0 && months[i] <= months[i - 1]) {
      throw ConfigError("schema months must be strictly ascending");
    }
  }
  std::set<ClimateVariable> seen(variables.begin(), variables.end());
  if (seen.size() != variables.size()) throw ConfigError("schema lists a variable twice");
}

std::size_t FeatureSchema::index(ClimateVariable v, int month, ClimateStat stat) const {
  const auto vit = std::find(variables.begin(), variables.end(), v);
  if (vit == variables.end()) {
    throw DomainError("variable " + std::string(to_string(v)) + " not in feature schema");
  }
  const auto mit = std::find(months.begin(), months.end(), month);
  if (mit == months.end()) {
    throw DomainError("month " + std::to_string(month) + " not in feature schema");
  }
  const auto vi = static_cast<std::size_t>(vit - variables.begin());
  const auto mi = static_cast<std::size_t>(mit - months.begin());
  return (vi * months.size() + mi) * kStatsPerMonth + static_cast<std::size_t>(stat);
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> names;
  names.reserve(size());
  for (auto v : variables) {
    for (int m : months) {
      for (auto stat_name : kStatNames) {
        names.push_back(std::string(to_string(v)) + "_m" + std::to_string(m) + "_" +
                        std::string(stat_name));
      }
    }
  }
  return names;
}

bool ClimateFeatureSet::has_missing() const noexcept {
  return std::any_of(features.begin(), features.end(), [](double x) { return std::isnan(x); });
}

ClimateFeatureSet monthly_stats(const Geohash& geohash4, int year, const DailySeries& daily,
                                const FeatureSchema& schema, MissingPolicy policy) {
  ClimateFeatureSet out;
  out.geohash4 = geohash4;
  out.year = year;
  out.features.assign(schema.size(), kMissing);

  for (auto v : schema.variables) {
    const auto it = daily.find(v);
    for (int month : schema.months) {
      std::vector<double> values;
      if (it != daily.end()) {
        for (const auto& obs : it->second) {
          if (obs.month == month) values.push_back(obs.value);
        }
      }
      if (values.empty()) {
        if (policy == MissingPolicy::Fail) {
          throw MissingDataError("no daily " + std::string(to_string(v)) + " values for " +
                                 geohash4.code() + " " + std::to_string(year) + "-" +
                                 std::to_string(month));
        }
        continue;
      }
      std::sort(values.begin(), values.end());
      const double n = static_cast<double>(values.size());
      double sum = 0.0;
      for (double x : values) sum += x;
      const double mean = sum / n;
      double ss = 0.0;
      for (double x : values) ss += (x - mean) * (x - mean);

      out.features[schema.index(v, month, ClimateStat::Min)] = values.front();
      out.features[schema.index(v, month, ClimateStat::Max)] = values.back();
      out.features[schema.index(v, month, ClimateStat::Mean)] = mean;
      out.features[schema.index(v, month, ClimateStat::Std)] =
          values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
  }
  return out;
}

const std::vector<double>& ClimateBaseline::at(const Geohash& g) const {
  const auto it = by_geohash.find(g.code());
  if (it == by_geohash.end()) {
    throw MissingDataError("no climate baseline for geohash " + g.code());
  }
  return it->second;
}

ClimateBaseline build_climate_baseline(std::span<const ClimateFeatureSet> raw,
                                       std::span<const int> reference_years) {
  const std::set<int> years(reference_years.begin(), reference_years.end());
  struct Acc {
    std::vector<double> sum;
    std::vector<std::size_t> n;
  };
  std::map<std::string, Acc> acc;
  for (const auto& set : raw) {
    if (!years.empty() && !years.count(set.year)) continue;
    auto& a = acc[set.geohash4.code()];
    if (a.sum.empty()) {
      a.sum.assign(set.features.size(), 0.0);
      a.n.assign(set.features.size(), 0);
    }
    if (a.sum.size() != set.features.size()) {
      throw ShapeError("climate feature sets for " + set.geohash4.code() + " differ in length");
    }
    for (std::size_t i = 0; i < set.features.size(); ++i) {
      if (std::isnan(set.features[i])) continue;
      a.sum[i] += set.features[i];
      ++a.n[i];
    }
  }
  ClimateBaseline out;
  for (auto& [code, a] : acc) {
    std::vector<double> mean(a.sum.size(), kMissing);
    for (std::size_t i = 0; i < mean.size(); ++i) {
      if (a.n[i] > 0) mean[i] = a.sum[i] / static_cast<double>(a.n[i]);
    }
    out.by_geohash.emplace(code, std::move(mean));
  }
  return out;
}

ClimateFeatureSet summarize_climate(const Geohash& geohash4, int year, const DailySeries& daily,
                                    const FeatureSchema& schema, const ClimateBaseline& baseline,
                                    MissingPolicy policy) {
  auto out = monthly_stats(geohash4, year, daily, schema, policy);
  const auto& base = baseline.at(geohash4);
  if (base.size() != out.features.size()) {
    throw ShapeError("climate baseline for " + geohash4.code() + " has " +
                     std::to_string(base.size()) + " features, schema has " +
                     std::to_string(out.features.size()));
  }
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    if (std::isnan(base[i]) && policy == MissingPolicy::Fail) {
      throw MissingDataError("climate baseline cell " + std::to_string(i) + " missing for " +
                             geohash4.code());
    }
    out.features[i] -= base[i];  // NaN propagates as the missing sentinel
  }
  return out;
}

void impute_missing(std::vector<ClimateFeatureSet>& sets) {
  if (sets.empty()) return;
  const std::size_t width = sets.front().features.size();
  std::vector<double> sum(width, 0.0);
  std::vector<std::size_t> n(width, 0);
  for (const auto& s : sets) {
    if (s.features.size() != width) throw ShapeError("climate feature sets differ in length");
    for (std::size_t i = 0; i < width; ++i) {
      if (!std::isnan(s.features[i])) {
        sum[i] += s.features[i];
        ++n[i];
      }
    }
  }
  for (auto& s : sets) {
    for (std::size_t i = 0; i < width; ++i) {
      if (std::isnan(s.features[i])) {
        if (n[i] == 0) throw MissingDataError("feature " + std::to_string(i) + " missing everywhere");
        s.features[i] = sum[i] / static_cast<double>(n[i]);
      }
    }
  }
}

std::string_view to_string(ScenarioId id) noexcept {
  switch (id) {
    case ScenarioId::Historic: return "historic";
    case ScenarioId::Counterfactual2030: return "counterfactual_2030";
    case ScenarioId::Ssp245_2030: return "ssp245_2030";
    case ScenarioId::Counterfactual2050: return "counterfactual_2050";
    case ScenarioId::Ssp245_2050: return "ssp245_2050";
  }
  return "historic";
}

std::optional<ScenarioId> try_scenario_from_string(std::string_view name) noexcept {
  for (auto id : {ScenarioId::Historic, ScenarioId::Counterfactual2030, ScenarioId::Ssp245_2030,
                  ScenarioId::Counterfactual2050, ScenarioId::Ssp245_2050}) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

ScenarioId scenario_from_string(std::string_view name) {
  if (auto id = try_scenario_from_string(name)) return *id;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

int series_year(ScenarioId id) noexcept {
  switch (id) {
    case ScenarioId::Counterfactual2030:
    case ScenarioId::Ssp245_2030: return 2030;
    case ScenarioId::Counterfactual2050:
    case ScenarioId::Ssp245_2050: return 2050;
    case ScenarioId::Historic: return 0;
  }
  return 0;
}

bool is_counterfactual(ScenarioId id) noexcept {
  return id == ScenarioId::Counterfactual2030 || id == ScenarioId::Counterfactual2050;
}

ScenarioId counterfactual_of(ScenarioId id) {
  switch (id) {
    case ScenarioId::Ssp245_2030:
    case ScenarioId::Counterfactual2030: return ScenarioId::Counterfactual2030;
    case ScenarioId::Ssp245_2050:
    case ScenarioId::Counterfactual2050: return ScenarioId::Counterfactual2050;
    case ScenarioId::Historic: break;
  }
  throw ConfigError("the historic series has no counterfactual partner");
}

std::string_view scenario_label(ScenarioId id) noexcept {
  if (id == ScenarioId::Historic) return "Historic";
  return is_counterfactual(id) ? "Counterfactual" : "SSP245";
}

const ScenarioSeries* ClimateBundle::find(ScenarioId id) const noexcept {
  for (const auto& s : series) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

}  // namespace yieldrisk
