// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/dataset.hpp"

#include <algorithm>
#include <tuple>
#include <utility>

#include "yieldrisk/error.hpp"

namespace yieldrisk {

std::vector<double> RegressionRow::inputs() const {
  std::vector<double> x;
  x.reserve(climate.size() + kExtraInputs);
  x.insert(x.end(), climate.begin(), climate.end());
  x.push_back(static_cast<double>(year));
  x.push_back(z_mu);
  x.push_back(z_sigma);
  return x;
}

NeighborhoodHistory::NeighborhoodHistory(std::span<const NeighborhoodSummary> summaries) {
  for (const auto& s : summaries) {
    by_geohash_[s.geohash4.code()].push_back({s.year, s.mean_delta, s.std_delta, s.maize_acres});
  }
  for (auto& [code, entries] : by_geohash_) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.year < b.year; });
  }
}

HistoryStats NeighborhoodHistory::before(const Geohash& g, int year) const {
  HistoryStats out;
  const auto it = by_geohash_.find(g.code());
  if (it == by_geohash_.end()) return out;
  double sm = 0.0, ss = 0.0;
  std::size_t n = 0;
  for (const auto& e : it->second) {
    if (e.year >= year) break;
    sm += e.mean_delta;
    ss += e.std_delta;
    ++n;
  }
  if (n > 0) {
    out.z_mu = sm / static_cast<double>(n);
    out.z_sigma = ss / static_cast<double>(n);
  }
  return out;
}

double NeighborhoodHistory::mean_acres(const Geohash& g) const {
  const auto it = by_geohash_.find(g.code());
  if (it == by_geohash_.end() || it->second.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : it->second) total += e.acres;
  return total / static_cast<double>(it->second.size());
}

std::vector<Geohash> NeighborhoodHistory::geohashes() const {
  std::vector<Geohash> out;
  out.reserve(by_geohash_.size());
  for (const auto& [code, entries] : by_geohash_) out.emplace_back(code);
  return out;
}

RegressionDataset build_regression_dataset(std::span<const NeighborhoodSummary> summaries,
                                           std::span<const ClimateFeatureSet> climate,
                                           const FeatureSchema& schema) {
  schema.validate();
  std::map<std::pair<std::string, int>, const ClimateFeatureSet*> climate_index;
  for (const auto& c : climate) {
    if (c.features.size() != schema.size()) {
      throw ShapeError("climate features for " + c.geohash4.code() + " " + std::to_string(c.year) +
                       " have " + std::to_string(c.features.size()) + " values, schema expects " +
                       std::to_string(schema.size()));
    }
    climate_index[{c.geohash4.code(), c.year}] = &c;
  }

  const NeighborhoodHistory history(summaries);
  RegressionDataset out;
  out.schema = schema;
  out.rows.reserve(summaries.size());
  for (const auto& s : summaries) {
    const auto it = climate_index.find({s.geohash4.code(), s.year});
    if (it == climate_index.end()) {
      out.warnings.push_back("no climate features for " + s.geohash4.code() + " " +
                             std::to_string(s.year));
      continue;
    }
    if (it->second->has_missing()) {
      out.warnings.push_back("missing climate cells for " + s.geohash4.code() + " " +
                             std::to_string(s.year));
      continue;
    }
    RegressionRow row;
    row.geohash4 = s.geohash4;
    row.year = s.year;
    row.climate = it->second->features;
    const auto h = history.before(s.geohash4, s.year);
    row.z_mu = h.z_mu;
    row.z_sigma = h.z_sigma;
    row.target_mean = s.mean_delta;
    row.target_std = s.std_delta;
    row.acres = s.maize_acres;
    out.rows.push_back(std::move(row));
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const RegressionRow& a, const RegressionRow& b) {
    return std::tie(a.year, a.geohash4) < std::tie(b.year, b.geohash4);
  });
  return out;
}

std::vector<std::size_t> attribute_columns(const FeatureSchema& schema, std::string_view attribute) {
  std::vector<std::size_t> cols;
  if (attribute == kNoAttributeDrop) return cols;
  if (attribute == "year") return {schema.size()};

  std::vector<ClimateVariable> vars;
  if (attribute == "temperature") {
    vars = {ClimateVariable::Tmin, ClimateVariable::Tmax};
  } else {
    try {
      vars = {climate_variable_from_string(attribute)};
    } catch (const ParseError&) {
      throw ConfigError("unknown attribute '" + std::string(attribute) + "'");
    }
  }
  for (auto v : vars) {
    if (std::find(schema.variables.begin(), schema.variables.end(), v) == schema.variables.end()) {
      continue;
    }
    for (int m : schema.months) {
      for (std::size_t s = 0; s < kStatsPerMonth; ++s) {
        cols.push_back(schema.index(v, m, static_cast<ClimateStat>(s)));
      }
    }
  }
  if (cols.empty()) {
    throw ConfigError("attribute '" + std::string(attribute) + "' has no columns in this schema");
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::vector<std::string> default_attribute_drop_menu() {
  return {"none",    "year",     "precipitation", "temperature", "rh_mean",
          "rh_peak", "heat_index", "wet_bulb",    "vpd",         "svp"};
}

}  // namespace yieldrisk
