// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/report_io.hpp"

#include <cmath>
#include <filesystem>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "csv_util.hpp"
#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

using json = nlohmann::json;
using detail::fmt_exact;

// Header-indexed CSV table of owned cells.
struct Table {
  std::map<std::string, std::size_t> columns;
  std::vector<std::vector<std::string>> rows;

  const std::string& cell(std::size_t row, const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) throw SchemaError("missing column '" + name + "'");
    return rows[row].at(it->second);
  }
  double number(std::size_t row, const std::string& name) const {
    const auto& c = cell(row, name);
    if (c == "inf") return std::numeric_limits<double>::infinity();
    if (c == "-inf") return -std::numeric_limits<double>::infinity();
    const auto v = detail::parse_double(c);
    if (!v) throw SchemaError("row " + std::to_string(row + 2) + ": bad number in '" + name + "'");
    return *v;
  }
  long long integer(std::size_t row, const std::string& name) const {
    const auto v = detail::parse_int(cell(row, name));
    if (!v) throw SchemaError("row " + std::to_string(row + 2) + ": bad integer in '" + name + "'");
    return *v;
  }
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  const auto header = detail::split_csv(line);
  for (std::size_t i = 0; i < header.size(); ++i) t.columns[std::string(header[i])] = i;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      throw SchemaError("row " + std::to_string(t.rows.size() + 2) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
    }
    t.rows.emplace_back(cells.begin(), cells.end());
  }
  return t;
}

std::string fmt_bound(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt_exact(v);
}

void append(std::vector<OutcomeRow>& out, ScenarioId id, const std::vector<NeighborhoodOutcome>& os) {
  for (const auto& o : os) {
    OutcomeRow r{id, o};
    r.outcome.trial_deltas.clear();
    r.outcome.trial_claims.clear();
    out.push_back(std::move(r));
  }
}

std::string write_file(const std::filesystem::path& dir, const std::string& name,
                       const std::function<void(std::ostream&)>& body) {
  const auto path = (dir / name).string();
  auto out = detail::open_output(path);
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
  return path;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
}

}  // namespace

std::vector<OutcomeRow> outcome_rows(const SimulationReport& report) {
  std::vector<OutcomeRow> out;
  append(out, report.treatment, report.treatment_outcomes);
  append(out, report.counterfactual, report.counterfactual_outcomes);
  return out;
}

std::vector<OutcomeRow> outcome_rows(const ScenarioRun& run) {
  std::vector<OutcomeRow> out;
  append(out, run.scenario, run.outcomes);
  return out;
}

void write_aggregates_csv(std::ostream& out, std::span<const YearAggregate> rows) {
  out << "scenario,year,unit_mean_yield_change,unit_loss_probability,avg_covered_loss_severity,"
         "acres,neighborhoods\n";
  for (const auto& a : rows) {
    out << to_string(a.scenario) << ',' << a.year << ',' << fmt_exact(a.unit_mean_yield_change) << ','
        << fmt_exact(a.unit_loss_probability) << ',' << fmt_exact(a.avg_covered_loss_severity) << ','
        << fmt_exact(a.acres) << ',' << a.neighborhoods << '\n';
  }
}

std::vector<YearAggregate> read_aggregates_csv(std::istream& in) {
  const auto t = read_table(in);
  std::vector<YearAggregate> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    YearAggregate a;
    a.scenario = scenario_from_string(t.cell(i, "scenario"));
    a.year = static_cast<int>(t.integer(i, "year"));
    a.unit_mean_yield_change = t.number(i, "unit_mean_yield_change");
    a.unit_loss_probability = t.number(i, "unit_loss_probability");
    a.avg_covered_loss_severity = t.number(i, "avg_covered_loss_severity");
    a.acres = t.number(i, "acres");
    a.neighborhoods = static_cast<std::size_t>(t.integer(i, "neighborhoods"));
    out.push_back(a);
  }
  return out;
}

void write_outcomes_csv(std::ostream& out, std::span<const OutcomeRow> rows) {
  out << "scenario,geohash4,year,acres,mean_pred,std_pred,n_trials,claims_rate,"
         "mean_severity_given_claim,mean_yield_change,p_value,significant_vs_counterfactual\n";
  for (const auto& r : rows) {
    const auto& o = r.outcome;
    out << to_string(r.scenario) << ',' << o.geohash4.code() << ',' << o.year << ','
        << fmt_exact(o.acres) << ',' << fmt_exact(o.mean_pred) << ',' << fmt_exact(o.std_pred) << ','
        << o.n_trials << ',' << fmt_exact(o.claims_rate) << ','
        << fmt_exact(o.mean_severity_given_claim) << ',' << fmt_exact(o.mean_yield_change) << ','
        << (o.p_value ? fmt_exact(*o.p_value) : "") << ','
        << (o.significant_vs_counterfactual ? "true" : "false") << '\n';
  }
}

std::vector<OutcomeRow> read_outcomes_csv(std::istream& in) {
  const auto t = read_table(in);
  std::vector<OutcomeRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    OutcomeRow r;
    r.scenario = scenario_from_string(t.cell(i, "scenario"));
    auto& o = r.outcome;
    o.geohash4 = Geohash(t.cell(i, "geohash4"));
    o.year = static_cast<int>(t.integer(i, "year"));
    o.acres = t.number(i, "acres");
    o.mean_pred = t.number(i, "mean_pred");
    o.std_pred = t.number(i, "std_pred");
    o.n_trials = static_cast<std::size_t>(t.integer(i, "n_trials"));
    o.claims_rate = t.number(i, "claims_rate");
    o.n_claims = static_cast<std::size_t>(std::llround(o.claims_rate * static_cast<double>(o.n_trials)));
    o.mean_severity_given_claim = t.number(i, "mean_severity_given_claim");
    o.mean_yield_change = t.number(i, "mean_yield_change");
    if (!t.cell(i, "p_value").empty()) o.p_value = t.number(i, "p_value");
    o.significant_vs_counterfactual = t.cell(i, "significant_vs_counterfactual") == "true";
    out.push_back(std::move(r));
  }
  return out;
}

void write_histograms_csv(std::ostream& out, std::span<const Histogram> hists) {
  out << "scenario,year,bin_low,bin_high,count\n";
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& h : hists) {
    const auto name = to_string(h.scenario);
    out << name << ',' << h.year << ',' << fmt_bound(-inf) << ',' << fmt_exact(h.edges.front()) << ','
        << h.underflow << '\n';
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      out << name << ',' << h.year << ',' << fmt_exact(h.edges[i]) << ',' << fmt_exact(h.edges[i + 1])
          << ',' << h.counts[i] << '\n';
    }
    out << name << ',' << h.year << ',' << fmt_exact(h.edges.back()) << ',' << fmt_bound(inf) << ','
        << h.overflow << '\n';
  }
}

std::vector<Histogram> read_histograms_csv(std::istream& in) {
  const auto t = read_table(in);
  std::vector<Histogram> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto scenario = scenario_from_string(t.cell(i, "scenario"));
    const int year = static_cast<int>(t.integer(i, "year"));
    if (out.empty() || out.back().scenario != scenario || out.back().year != year) {
      out.push_back({scenario, year, {}, {}, 0, 0, 0});
    }
    auto& h = out.back();
    const double lo = t.number(i, "bin_low"), hi = t.number(i, "bin_high");
    const auto count = static_cast<std::size_t>(t.integer(i, "count"));
    h.total += count;
    if (std::isinf(lo)) {
      h.underflow = count;
    } else if (std::isinf(hi)) {
      h.overflow = count;
    } else {
      if (h.edges.empty()) h.edges.push_back(lo);
      h.edges.push_back(hi);
      h.counts.push_back(count);
    }
  }
  return out;
}

json to_json(const YearAggregate& a) {
  return {{"scenario", to_string(a.scenario)},
          {"year", a.year},
          {"unit_mean_yield_change", a.unit_mean_yield_change},
          {"unit_loss_probability", a.unit_loss_probability},
          {"avg_covered_loss_severity", a.avg_covered_loss_severity},
          {"acres", a.acres},
          {"neighborhoods", a.neighborhoods}};
}

json to_json(const OutcomeRow& r) {
  const auto& o = r.outcome;
  return {{"scenario", to_string(r.scenario)},
          {"geohash4", o.geohash4.code()},
          {"year", o.year},
          {"acres", o.acres},
          {"mean_pred", o.mean_pred},
          {"std_pred", o.std_pred},
          {"n_trials", o.n_trials},
          {"claims_rate", o.claims_rate},
          {"mean_severity_given_claim", o.mean_severity_given_claim},
          {"mean_yield_change", o.mean_yield_change},
          {"p_value", o.p_value ? json(*o.p_value) : json(nullptr)},
          {"significant_vs_counterfactual", o.significant_vs_counterfactual}};
}

json to_json(const Histogram& h) {
  return {{"scenario", to_string(h.scenario)},
          {"year", h.year},
          {"edges", h.edges},
          {"counts", h.counts},
          {"underflow", h.underflow},
          {"overflow", h.overflow},
          {"total", h.total}};
}

json to_json(const SimulationReport& report) {
  json aggregates = json::array();
  for (const auto& a : report.aggregates) aggregates.push_back(to_json(a));
  json rows = json::array();
  for (const auto& r : outcome_rows(report)) rows.push_back(to_json(r));
  return {{"treatment", to_string(report.treatment)},
          {"counterfactual", to_string(report.counterfactual)},
          {"alpha", report.options.alpha},
          {"compare_on", to_string(report.options.compare_on)},
          {"n_tests", report.n_tests},
          {"threshold", report.threshold},
          {"pct_acreage_significant", report.pct_acreage_significant},
          {"significant_neighborhoods", report.significant_neighborhoods},
          {"severity_basis", "conditional_on_claim"},
          {"aggregates", aggregates},
          {"outcomes", rows},
          {"warnings", report.warnings}};
}

RenderedOutputs render_outputs(std::span<const SimulationReport> reports, const std::string& dir) {
  ensure_dir(dir);
  std::vector<YearAggregate> aggregates;
  std::vector<OutcomeRow> rows;
  std::vector<Histogram> hists;
  json comparisons = json::array();
  for (const auto& r : reports) {
    aggregates.insert(aggregates.end(), r.aggregates.begin(), r.aggregates.end());
    const auto o = outcome_rows(r);
    rows.insert(rows.end(), o.begin(), o.end());
    for (const auto* side : {&r.treatment_outcomes, &r.counterfactual_outcomes}) {
      const auto h = outcome_histograms(side == &r.treatment_outcomes ? r.treatment : r.counterfactual, *side);
      hists.insert(hists.end(), h.begin(), h.end());
    }
    auto summary = to_json(r);
    summary.erase("outcomes");
    comparisons.push_back(std::move(summary));
  }

  RenderedOutputs out;
  out.files.push_back(write_file(dir, "aggregates.csv", [&](std::ostream& s) { write_aggregates_csv(s, aggregates); }));
  out.files.push_back(write_file(dir, "aggregates.json", [&](std::ostream& s) {
    json a = json::array();
    for (const auto& g : aggregates) a.push_back(to_json(g));
    s << a.dump(2) << '\n';
  }));
  out.files.push_back(write_file(dir, "outcomes.csv", [&](std::ostream& s) { write_outcomes_csv(s, rows); }));
  out.files.push_back(write_file(dir, "histograms.csv", [&](std::ostream& s) { write_histograms_csv(s, hists); }));
  out.files.push_back(write_file(dir, "comparison.json", [&](std::ostream& s) { s << comparisons.dump(2) << '\n'; }));
  return out;
}

RenderedOutputs render_runs(std::span<const ScenarioRun> runs, const std::string& dir) {
  ensure_dir(dir);
  std::vector<YearAggregate> aggregates;
  std::vector<OutcomeRow> rows;
  std::vector<Histogram> hists;
  for (const auto& run : runs) {
    const auto a = aggregate_outcomes(run.scenario, run.outcomes);
    aggregates.insert(aggregates.end(), a.begin(), a.end());
    const auto o = outcome_rows(run);
    rows.insert(rows.end(), o.begin(), o.end());
    const auto h = outcome_histograms(run.scenario, run.outcomes);
    hists.insert(hists.end(), h.begin(), h.end());
  }
  RenderedOutputs out;
  out.files.push_back(write_file(dir, "aggregates.csv", [&](std::ostream& s) { write_aggregates_csv(s, aggregates); }));
  out.files.push_back(write_file(dir, "aggregates.json", [&](std::ostream& s) {
    json a = json::array();
    for (const auto& g : aggregates) a.push_back(to_json(g));
    s << a.dump(2) << '\n';
  }));
  out.files.push_back(write_file(dir, "outcomes.csv", [&](std::ostream& s) { write_outcomes_csv(s, rows); }));
  out.files.push_back(write_file(dir, "histograms.csv", [&](std::ostream& s) { write_histograms_csv(s, hists); }));
  return out;
}

}  // namespace yieldrisk
