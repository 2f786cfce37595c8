// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// File and JSON renderings of simulation results. CSV headers and JSON field
// names are identical so there is one schema:
//
//   aggregates.csv  scenario,year,unit_mean_yield_change,unit_loss_probability,
//                   avg_covered_loss_severity,acres,neighborhoods
//   outcomes.csv    scenario,geohash4,year,acres,mean_pred,std_pred,n_trials,
//                   claims_rate,mean_severity_given_claim,mean_yield_change,
//                   p_value,significant_vs_counterfactual
//   histograms.csv  scenario,year,bin_low,bin_high,count
//
// Numbers are written in shortest round-trip form, so output bytes depend
// only on the values.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "yieldrisk/simulation.hpp"

namespace yieldrisk {

struct OutcomeRow {
  ScenarioId scenario = ScenarioId::Historic;
  NeighborhoodOutcome outcome;  // trial vectors left empty when read back
};

std::vector<OutcomeRow> outcome_rows(const SimulationReport& report);
std::vector<OutcomeRow> outcome_rows(const ScenarioRun& run);

void write_aggregates_csv(std::ostream& out, std::span<const YearAggregate> rows);
std::vector<YearAggregate> read_aggregates_csv(std::istream& in);
void write_outcomes_csv(std::ostream& out, std::span<const OutcomeRow> rows);
std::vector<OutcomeRow> read_outcomes_csv(std::istream& in);
void write_histograms_csv(std::ostream& out, std::span<const Histogram> hists);
std::vector<Histogram> read_histograms_csv(std::istream& in);

nlohmann::json to_json(const YearAggregate& a);
nlohmann::json to_json(const OutcomeRow& r);
nlohmann::json to_json(const Histogram& h);
/// Summary, aggregates and per-neighborhood rows (no trial samples).
nlohmann::json to_json(const SimulationReport& report);

struct RenderedOutputs {
  std::vector<std::string> files;
};

/// Writes aggregates.csv, aggregates.json, outcomes.csv, histograms.csv and
/// comparison.json for the reports into `dir` (created if needed).
RenderedOutputs render_outputs(std::span<const SimulationReport> reports, const std::string& dir);
/// Same files for uncompared runs (no p-values, no comparison.json).
RenderedOutputs render_runs(std::span<const ScenarioRun> runs, const std::string& dir);

}  // namespace yieldrisk
