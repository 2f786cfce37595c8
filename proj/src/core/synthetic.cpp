// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "yieldrisk/coverage.hpp"
#include "yieldrisk/error.hpp"
#include "yieldrisk/rng.hpp"
#include "yieldrisk/unit_size.hpp"

namespace yieldrisk {
namespace {

// Variables that rise with warming; the rest (precipitation, humidity) fall.
bool warming_type(ClimateVariable v) {
  switch (v) {
    case ClimateVariable::Tmin:
    case ClimateVariable::Tmax:
    case ClimateVariable::HeatIndex:
    case ClimateVariable::WetBulb:
    case ClimateVariable::Vpd:
    case ClimateVariable::Svp: return true;
    default: return false;
  }
}

std::vector<double> shift_direction(const FeatureSchema& schema) {
  std::vector<double> dir(schema.size(), 0.0);
  for (auto v : schema.variables) {
    for (int m : schema.months) {
      for (std::size_t s = 0; s < kStatsPerMonth; ++s) {
        dir[schema.index(v, m, static_cast<ClimateStat>(s))] = warming_type(v) ? 1.0 : -0.5;
      }
    }
  }
  return dir;
}

std::vector<Geohash> make_neighborhoods(int n, Rng& rng) {
  std::uniform_real_distribution<double> lat(38.0, 45.0), lon(-98.0, -82.0);
  std::set<std::string> seen;
  std::vector<Geohash> out;
  while (static_cast<int>(out.size()) < n) {
    auto g = encode_geohash(lat(rng), lon(rng), kNeighborhoodPrecision);
    if (seen.insert(g.code()).second) out.push_back(std::move(g));
  }
  return out;
}

std::vector<double> standardized_draws(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(n));
  for (auto& v : z) v = std::clamp(normal(rng), -3.5, 3.5);
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  for (auto& v : z) v = (v - mean) / sd;
  return z;
}

}  // namespace

void SyntheticConfig::validate() const {
  schema.validate();
  if (n_neighborhoods < 1) throw ConfigError("synthetic: n_neighborhoods must be >= 1");
  if (n_years < 1) throw ConfigError("synthetic: n_years must be >= 1");
  if (units_per_neighborhood < 3) throw ConfigError("synthetic: need >= 3 units per neighborhood");
  if (noise_scale < 0.0) throw ConfigError("synthetic: noise_scale must be >= 0");
  if (!(std_floor > 0.0 && std_cap > std_floor)) throw ConfigError("synthetic: bad std bounds");
  if (series_window < 1) throw ConfigError("synthetic: series_window must be >= 1");
  if (informative_features < 0) throw ConfigError("synthetic: informative_features must be >= 0");
}

double SyntheticTruth::mean_response(const std::vector<double>& climate, int year) const {
  double m = intercept + year_trend * (year - trend_reference_year);
  for (std::size_t i = 0; i < climate.size(); ++i) m += mean_coefficients[i] * climate[i];
  return m;
}

double SyntheticTruth::std_response(const std::vector<double>& climate) const {
  double s = std_base;
  for (std::size_t i = 0; i < climate.size(); ++i) s += std_coefficients[i] * climate[i];
  return std::clamp(s, std_floor, std_cap);
}

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const auto& schema = config.schema;
  Rng rng(derive_seed(config.seed, "synthetic", 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticDataset out;
  auto& truth = out.truth;
  truth.intercept = config.intercept;
  truth.year_trend = config.year_trend;
  truth.trend_reference_year = config.trend_reference_year;
  truth.std_base = config.std_base;
  truth.std_floor = config.std_floor;
  truth.std_cap = config.std_cap;
  truth.mean_coefficients.assign(schema.size(), 0.0);
  truth.std_coefficients.assign(schema.size(), 0.0);

  // Informative features are monthly means of randomly chosen (variable, month) pairs.
  std::vector<std::pair<ClimateVariable, int>> cells;
  for (auto v : schema.variables)
    for (int m : schema.months) cells.emplace_back(v, m);
  std::shuffle(cells.begin(), cells.end(), rng);
  const auto n_informative =
      std::min<std::size_t>(static_cast<std::size_t>(config.informative_features), cells.size());
  for (std::size_t k = 0; k < n_informative; ++k) {
    const auto [v, m] = cells[k];
    const auto idx = schema.index(v, m, ClimateStat::Mean);
    const double sign = warming_type(v) ? -1.0 : 1.0;
    truth.mean_coefficients[idx] = sign * config.mean_effect * (0.7 + 0.6 * unit(rng));
    truth.std_coefficients[idx] = -sign * config.std_effect * (0.7 + 0.6 * unit(rng));
  }

  const auto neighborhoods = make_neighborhoods(config.n_neighborhoods, rng);
  const auto sizes = UnitSizeTable::default_table();
  const auto direction = shift_direction(schema);

  out.climate.schema = schema;
  ScenarioSeries historic{ScenarioId::Historic, {}};
  std::vector<ScenarioSeries> future = {{ScenarioId::Counterfactual2030, {}},
                                        {ScenarioId::Ssp245_2030, {}},
                                        {ScenarioId::Counterfactual2050, {}},
                                        {ScenarioId::Ssp245_2050, {}}};

  for (const auto& g : neighborhoods) {
    std::vector<double> offset(schema.size());
    for (auto& o : offset) o = 0.3 * normal(rng);

    struct Unit {
      double base_yield;
      double acres;
    };
    std::vector<Unit> units(static_cast<std::size_t>(config.units_per_neighborhood));
    for (auto& u : units) {
      u.base_yield = 120.0 + 100.0 * unit(rng);
      u.acres = sizes.sample(rng);
    }

    for (int y = config.first_year; y < config.first_year + config.n_years; ++y) {
      ClimateFeatureSet set{g, y, std::vector<double>(schema.size())};
      for (std::size_t i = 0; i < schema.size(); ++i) set.features[i] = offset[i] + normal(rng);

      double mu = truth.mean_response(set.features, y);
      double sigma = config.std_base;
      for (std::size_t i = 0; i < schema.size(); ++i) sigma += truth.std_coefficients[i] * set.features[i];
      if (config.noise_scale > 0.0) {
        mu += config.noise_scale * normal(rng);
        sigma += 0.5 * config.noise_scale * normal(rng);
      }
      sigma = std::clamp(sigma, config.std_floor, config.std_cap);
      truth.moments[{g.code(), y}] = {mu, sigma};

      const auto z = standardized_draws(config.units_per_neighborhood, rng);
      for (std::size_t u = 0; u < units.size(); ++u) {
        UnitYieldRecord r;
        r.unit_id = g.code() + "-u" + std::to_string(u);
        r.geohash4 = g;
        r.year = y;
        r.unit_acres = units[u].acres;
        r.y_history.resize(10);
        for (auto& h : r.y_history) h = std::max(1.0, units[u].base_yield * (1.0 + 0.08 * normal(rng)));
        const double expected = expected_yield(r.y_history, 10);
        r.y_actual = std::max(0.0, expected * (1.0 + mu + sigma * z[u]));
        out.yields.push_back(std::move(r));
      }
      historic.climate.push_back(std::move(set));
    }

    for (auto& series : future) {
      const int centre = series_year(series.id);
      const bool ssp = !is_counterfactual(series.id);
      const double shift = centre == 2030 ? config.warming_2030 : config.warming_2050;
      const double spread = centre == 2030 ? config.variability_2030 : config.variability_2050;
      for (int k = 0; k < config.series_window; ++k) {
        const int y = centre - config.series_window / 2 + k;
        ClimateFeatureSet set{g, y, std::vector<double>(schema.size())};
        for (std::size_t i = 0; i < schema.size(); ++i) {
          set.features[i] = ssp ? offset[i] + shift * direction[i] + spread * normal(rng)
                                : offset[i] + normal(rng);
        }
        series.climate.push_back(std::move(set));
      }
    }
  }

  out.climate.series.push_back(std::move(historic));
  for (auto& s : future) out.climate.series.push_back(std::move(s));
  return out;
}

}  // namespace yieldrisk
