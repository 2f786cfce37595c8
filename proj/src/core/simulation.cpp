// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/simulation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "yieldrisk/error.hpp"
#include "yieldrisk/rng.hpp"
#include "yieldrisk/stats.hpp"

namespace yieldrisk {
namespace {

template <class E, std::size_t N>
E enum_from(std::string_view name, const std::array<E, N>& all, const char* what) {
  for (auto e : all) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

std::size_t pick(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool outcome_less(const NeighborhoodOutcome& a, const NeighborhoodOutcome& b) {
  return std::tie(a.geohash4, a.year) < std::tie(b.geohash4, b.year);
}

void run_parallel(std::size_t tasks, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), tasks));
  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view to_string(UnitSizePolicy p) noexcept {
  switch (p) {
    case UnitSizePolicy::HistoricDraw: return "historic_draw";
    case UnitSizePolicy::SingleField: return "single_field";
    case UnitSizePolicy::OptionalUnitsRemoved: return "optional_units_removed";
  }
  return "?";
}

UnitSizePolicy unit_size_policy_from_string(std::string_view name) {
  return enum_from(name,
                   std::array{UnitSizePolicy::HistoricDraw, UnitSizePolicy::SingleField,
                              UnitSizePolicy::OptionalUnitsRemoved},
                   "unit size policy");
}

std::string_view to_string(DeltaSampler s) noexcept {
  return s == DeltaSampler::Normal ? "normal" : "bootstrap";
}

DeltaSampler delta_sampler_from_string(std::string_view name) {
  return enum_from(name, std::array{DeltaSampler::Normal, DeltaSampler::Bootstrap}, "sampler");
}

std::string_view to_string(CompareOn c) noexcept {
  return c == CompareOn::Claims ? "claims" : "yield_delta";
}

CompareOn compare_on_from_string(std::string_view name) {
  return enum_from(name, std::array{CompareOn::Claims, CompareOn::YieldDelta}, "compare_on");
}

void ScenarioSpec::validate() const {
  coverage.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(sample_granularity_km > 0.0)) throw ConfigError("sample_granularity_km must be > 0");
  if (samples_per_unit < 0) throw ConfigError("samples_per_unit must be >= 0");
  if (size_table.acres().empty()) throw ConfigError("unit size table is empty");
}

UnitTrial simulate_unit_trial(const Prediction& pred, const Residuals& pools, int unit_samples,
                              const CoveragePolicy& coverage, Rng& rng, DeltaSampler sampler,
                              std::span<const double> shape_pool) {
  if (pools.mean_residuals.empty() || pools.std_residuals.empty()) {
    throw ConfigError("residual pools must be nonempty");
  }
  if (unit_samples < 1) throw ConfigError("unit must cover at least one sample");
  if (sampler == DeltaSampler::Bootstrap && shape_pool.empty()) {
    throw ConfigError("bootstrap sampler needs a nonempty delta pool");
  }
  const double mean = pred.mean_pred + pools.mean_residuals[pick(pools.mean_residuals.size(), rng)];
  const double sd =
      std::max(0.0, pred.std_pred + pools.std_residuals[pick(pools.std_residuals.size(), rng)]);

  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  for (int i = 0; i < unit_samples; ++i) {
    const double z = sampler == DeltaSampler::Normal ? normal(rng)
                                                     : shape_pool[pick(shape_pool.size(), rng)];
    sum += mean + sd * z;
  }
  UnitTrial t;
  t.y_delta = std::max(-1.0, sum / unit_samples);  // yields cannot go negative
  t.outcome = delta_loss(coverage, t.y_delta, sd / std::sqrt(static_cast<double>(unit_samples)));
  return t;
}

std::vector<NeighborhoodInput> predict_distributions(const TrainedRegressor& model,
                                                     const ScenarioSeries& series,
                                                     const NeighborhoodHistory& history,
                                                     std::vector<std::string>* warnings) {
  std::map<std::pair<std::string, int>, const ClimateFeatureSet*> climate;
  std::set<int> years;
  for (const auto& c : series.climate) {
    if (c.features.size() != model.schema().size()) {
      throw ShapeError("series " + std::string(to_string(series.id)) + " has " +
                       std::to_string(c.features.size()) + " features, model expects " +
                       std::to_string(model.schema().size()));
    }
    climate[{c.geohash4.code(), c.year}] = &c;
    years.insert(c.year);
  }

  std::vector<RegressionRow> rows;
  std::vector<NeighborhoodInput> out;
  for (const auto& g : history.geohashes()) {
    for (int y : years) {
      const auto it = climate.find({g.code(), y});
      if (it == climate.end() || it->second->has_missing()) {
        if (warnings) {
          warnings->push_back("skipped " + g.code() + " " + std::to_string(y) + ": " +
                              (it == climate.end() ? "no climate features" : "missing climate cells"));
        }
        continue;
      }
      RegressionRow row;
      row.geohash4 = g;
      row.year = y;
      row.climate = it->second->features;
      const auto h = history.before(g, y);
      row.z_mu = h.z_mu;
      row.z_sigma = h.z_sigma;
      rows.push_back(std::move(row));
      out.push_back({g, y, history.mean_acres(g), {}});
    }
  }
  const auto preds = model.predict_batch(rows);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].pred = preds[i];
  return out;
}

ScenarioRun simulate_neighborhoods(const ScenarioSpec& spec, std::span<const NeighborhoodInput> inputs,
                                   const Residuals& pools, std::span<const double> shape_pool) {
  spec.validate();
  if (pools.mean_residuals.empty() || pools.std_residuals.empty()) {
    throw ConfigError("residual pools must be nonempty");
  }
  const UnitSizeTable table = spec.unit_size_policy == UnitSizePolicy::OptionalUnitsRemoved
                                  ? spec.size_table.without_smallest(kOptionalUnitQuantile)
                                  : spec.size_table;

  ScenarioRun run;
  run.scenario = spec.scenario;
  run.outcomes.resize(inputs.size());
  run_parallel(inputs.size(), spec.threads, [&](std::size_t i) {
    const auto& in = inputs[i];
    Rng rng = make_substream(derive_seed(spec.seed, in.geohash4.code(), in.year), "trials", 0);
    auto& o = run.outcomes[i];
    o.geohash4 = in.geohash4;
    o.year = in.year;
    o.acres = in.acres;
    o.mean_pred = in.pred.mean_pred;
    o.std_pred = in.pred.std_pred;
    o.n_trials = static_cast<std::size_t>(spec.trials);
    o.trial_deltas.resize(o.n_trials);
    o.trial_claims.resize(o.n_trials);
    double delta_sum = 0.0, severity_sum = 0.0;
    for (std::size_t t = 0; t < o.n_trials; ++t) {
      int k = 1;
      if (spec.samples_per_unit > 0) {
        k = spec.samples_per_unit;
      } else if (spec.unit_size_policy != UnitSizePolicy::SingleField) {
        k = samples_for_unit(table.sample(rng), spec.sample_granularity_km);
      }
      const auto trial = simulate_unit_trial(in.pred, pools, k, spec.coverage, rng, spec.sampler, shape_pool);
      o.trial_deltas[t] = trial.y_delta;
      o.trial_claims[t] = trial.outcome.claim ? 1.0 : 0.0;
      delta_sum += trial.y_delta;
      if (trial.outcome.claim) {
        ++o.n_claims;
        severity_sum += trial.outcome.severity;
      }
    }
    const double n = static_cast<double>(o.n_trials);
    o.claims_rate = static_cast<double>(o.n_claims) / n;
    o.mean_yield_change = delta_sum / n;
    o.mean_severity_given_claim = o.n_claims ? severity_sum / static_cast<double>(o.n_claims) : 0.0;
  });
  std::sort(run.outcomes.begin(), run.outcomes.end(), outcome_less);
  return run;
}

ScenarioRun run_scenario(const ScenarioSpec& spec, const TrainedRegressor& model,
                         const ScenarioSeries& series, const NeighborhoodHistory& history,
                         std::span<const double> shape_pool) {
  std::vector<std::string> warnings;
  const auto inputs = predict_distributions(model, series, history, &warnings);
  auto run = simulate_neighborhoods(spec, inputs, model.residuals, shape_pool);
  run.warnings = std::move(warnings);
  return run;
}

std::vector<double> standardized_delta_pool(std::span<const UnitYieldRecord> records, int window) {
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (r.y_history.empty()) continue;
    const double expected = expected_yield(r.y_history, window);
    if (!(expected > 0.0)) continue;
    groups[{r.geohash4.code(), r.year}].push_back(compute_yield_delta(r.y_actual, expected));
  }
  std::vector<double> pool;
  for (const auto& [key, d] : groups) {
    if (d.size() < 2) continue;
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
    if (!(sd > 0.0)) continue;
    for (double v : d) pool.push_back((v - mean) / sd);
  }
  return pool;
}

int aggregate_year(ScenarioId scenario, int calendar_year) noexcept {
  const int y = series_year(scenario);
  return y ? y : calendar_year;
}

std::vector<YearAggregate> aggregate_outcomes(ScenarioId scenario,
                                              std::span<const NeighborhoodOutcome> outcomes) {
  struct Acc {
    double acres = 0, change = 0, prob = 0, sev = 0, sev_weight = 0;
    std::size_t n = 0;
  };
  std::map<int, Acc> by_year;
  for (const auto& o : outcomes) {
    auto& a = by_year[aggregate_year(scenario, o.year)];
    a.acres += o.acres;
    a.change += o.acres * o.mean_yield_change;
    a.prob += o.acres * o.claims_rate;
    a.sev += o.acres * o.claims_rate * o.mean_severity_given_claim;
    a.sev_weight += o.acres * o.claims_rate;
    ++a.n;
  }
  std::vector<YearAggregate> out;
  for (const auto& [year, a] : by_year) {
    YearAggregate g;
    g.scenario = scenario;
    g.year = year;
    g.acres = a.acres;
    g.neighborhoods = a.n;
    if (a.acres > 0.0) {
      g.unit_mean_yield_change = a.change / a.acres;
      g.unit_loss_probability = a.prob / a.acres;
    }
    if (a.sev_weight > 0.0) g.avg_covered_loss_severity = a.sev / a.sev_weight;
    out.push_back(g);
  }
  return out;
}

SimulationReport compare_scenarios(const ScenarioRun& treatment, const ScenarioRun& counterfactual,
                                   const ComparisonOptions& options) {
  if (treatment.outcomes.size() != counterfactual.outcomes.size()) {
    throw ComparisonError("scenarios cover different neighborhood-years (" +
                          std::to_string(treatment.outcomes.size()) + " vs " +
                          std::to_string(counterfactual.outcomes.size()) + ")");
  }
  if (treatment.outcomes.empty()) throw ComparisonError("nothing to compare");

  SimulationReport r;
  r.treatment = treatment.scenario;
  r.counterfactual = counterfactual.scenario;
  r.options = options;
  r.treatment_outcomes = treatment.outcomes;
  r.counterfactual_outcomes = counterfactual.outcomes;
  std::sort(r.treatment_outcomes.begin(), r.treatment_outcomes.end(), outcome_less);
  std::sort(r.counterfactual_outcomes.begin(), r.counterfactual_outcomes.end(), outcome_less);
  r.warnings = treatment.warnings;
  r.warnings.insert(r.warnings.end(), counterfactual.warnings.begin(), counterfactual.warnings.end());

  r.n_tests = r.treatment_outcomes.size();
  r.threshold = stats::bonferroni_threshold(options.alpha, r.n_tests);

  std::map<std::string, std::pair<double, bool>> neighborhoods;  // acres, flagged
  for (std::size_t i = 0; i < r.n_tests; ++i) {
    auto& t = r.treatment_outcomes[i];
    auto& c = r.counterfactual_outcomes[i];
    if (t.geohash4 != c.geohash4 || t.year != c.year) {
      throw ComparisonError("scenarios differ at " + t.geohash4.code() + " " + std::to_string(t.year) +
                            " vs " + c.geohash4.code() + " " + std::to_string(c.year));
    }
    const bool on_claims = options.compare_on == CompareOn::Claims;
    const auto& a = on_claims ? t.trial_claims : t.trial_deltas;
    const auto& b = on_claims ? c.trial_claims : c.trial_deltas;
    if (a.empty() || b.empty()) throw ComparisonError("outcomes carry no trial samples");
    const double p = stats::mann_whitney_u(a, b).p_value;
    t.p_value = p;
    c.p_value = p;
    t.significant_vs_counterfactual = p < r.threshold;
    c.significant_vs_counterfactual = t.significant_vs_counterfactual;
    auto& n = neighborhoods[t.geohash4.code()];
    n.first = t.acres;
    n.second = n.second || t.significant_vs_counterfactual;
  }

  double total = 0.0, flagged = 0.0;
  for (const auto& [code, n] : neighborhoods) {
    total += n.first;
    if (n.second) {
      flagged += n.first;
      r.significant_neighborhoods.push_back(code);
    }
  }
  r.pct_acreage_significant = total > 0.0 ? flagged / total : 0.0;

  r.aggregates = aggregate_outcomes(r.treatment, r.treatment_outcomes);
  const auto cf = aggregate_outcomes(r.counterfactual, r.counterfactual_outcomes);
  r.aggregates.insert(r.aggregates.end(), cf.begin(), cf.end());
  return r;
}

Histogram make_histogram(ScenarioId scenario, int year, std::span<const double> values) {
  Histogram h;
  h.scenario = scenario;
  h.year = year;
  h.counts.assign(kHistogramBins, 0);
  for (std::size_t i = 0; i <= kHistogramBins; ++i) {
    h.edges.push_back(kHistogramLow + static_cast<double>(i) * kHistogramWidth);
  }
  for (double v : values) {
    ++h.total;
    if (v < kHistogramLow) {
      ++h.underflow;
    } else if (v > kHistogramHigh) {
      ++h.overflow;
    } else {
      const auto bin = static_cast<std::size_t>(std::floor((v - kHistogramLow) / kHistogramWidth));
      ++h.counts[std::min(bin, kHistogramBins - 1)];
    }
  }
  return h;
}

std::vector<Histogram> outcome_histograms(ScenarioId scenario,
                                          std::span<const NeighborhoodOutcome> outcomes) {
  std::map<int, std::vector<double>> by_year;
  for (const auto& o : outcomes) {
    auto& v = by_year[aggregate_year(scenario, o.year)];
    v.insert(v.end(), o.trial_deltas.begin(), o.trial_deltas.end());
  }
  std::vector<Histogram> out;
  for (const auto& [year, values] : by_year) out.push_back(make_histogram(scenario, year, values));
  return out;
}

}  // namespace yieldrisk
