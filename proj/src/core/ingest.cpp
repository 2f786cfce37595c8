// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv_util.hpp"
#include "yieldrisk/error.hpp"

namespace yieldrisk {

using detail::fmt6;
using detail::fmt_exact;
using detail::parse_double;
using detail::parse_int;
using detail::split_csv;
using json = nlohmann::json;

namespace {

constexpr std::size_t kMaxDiagnostics = 20;

class Diagnostics {
 public:
  void add(std::size_t line, const std::string& msg) {
    ++count_;
    if (lines_.size() < kMaxDiagnostics) {
      lines_.push_back("row " + std::to_string(line) + ": " + msg);
    }
  }
  void throw_if_any(const std::string& what) const {
    if (count_ == 0) return;
    std::string msg = what + ": " + std::to_string(count_) + " invalid row(s)";
    for (const auto& l : lines_) msg += "\n  " + l;
    throw IngestError(msg);
  }

 private:
  std::vector<std::string> lines_;
  std::size_t count_ = 0;
};

std::map<std::string, std::size_t> header_index(std::string_view header_line,
                                                std::span<const std::string_view> required,
                                                const std::string& what) {
  std::map<std::string, std::size_t> index;
  const auto cols = split_csv(header_line);
  for (std::size_t i = 0; i < cols.size(); ++i) index.emplace(std::string(cols[i]), i);
  std::string missing;
  for (auto name : required) {
    if (!index.count(std::string(name))) {
      missing += missing.empty() ? "" : ", ";
      missing += name;
    }
  }
  if (!missing.empty()) throw IngestError(what + ": header is missing column(s): " + missing);
  return index;
}

bool skip_line(const std::string& line) {
  return detail::trim(line).empty();
}

bool parse_date(std::string_view s, int& y, int& m, int& d) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  const auto yy = parse_int(s.substr(0, 4));
  const auto mm = parse_int(s.substr(5, 2));
  const auto dd = parse_int(s.substr(8, 2));
  if (!yy || !mm || !dd || *mm < 1 || *mm > 12 || *dd < 1 || *dd > 31) return false;
  y = static_cast<int>(*yy);
  m = static_cast<int>(*mm);
  d = static_cast<int>(*dd);
  return true;
}

json summary_to_json(const NeighborhoodSummary& s) {
  // Round-tripped through the 6-digit text form so CSV and JSONL agree.
  auto r = [](double v) { return std::stod(fmt6(v)); };
  return json{{"geohash4", s.geohash4.code()},
              {"year", s.year},
              {"mean_delta", r(s.mean_delta)},
              {"std_delta", r(s.std_delta)},
              {"count", s.count},
              {"skewness", r(s.skewness)},
              {"excess_kurtosis", r(s.excess_kurtosis)},
              {"approx_normal", s.approx_normal},
              {"approx_symmetric", s.approx_symmetric},
              {"maize_acres", r(s.maize_acres)}};
}

constexpr std::string_view kSummaryColumns[] = {
    "geohash4",        "year",          "mean_delta",       "std_delta",   "count",
    "skewness",        "excess_kurtosis", "approx_normal",  "approx_symmetric", "maize_acres",
};

}  // namespace

std::vector<UnitYieldRecord> read_yield_csv(std::istream& in) {
  static constexpr std::string_view kRequired[] = {"unit_id", "geohash4", "year", "y_actual",
                                                   "acres"};
  std::string line;
  if (!std::getline(in, line)) throw IngestError("yield CSV: missing header row");
  const auto idx = header_index(line, kRequired, "yield CSV");
  std::vector<std::size_t> history_cols;
  for (int h = 1; h <= kMaxHistoryColumns; ++h) {
    const auto it = idx.find("h" + std::to_string(h));
    if (it != idx.end()) history_cols.push_back(it->second);
  }

  std::vector<UnitYieldRecord> out;
  Diagnostics diag;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto cells = split_csv(line);
    auto cell = [&](const std::string& name) -> std::string_view {
      const auto i = idx.at(name);
      return i < cells.size() ? cells[i] : std::string_view{};
    };

    UnitYieldRecord r;
    r.unit_id = std::string(cell("unit_id"));
    if (r.unit_id.empty()) {
      diag.add(line_no, "empty unit_id");
      continue;
    }
    try {
      r.geohash4 = Geohash(cell("geohash4"));
    } catch (const ParseError& e) {
      diag.add(line_no, e.what());
      continue;
    }
    const auto year = parse_int(cell("year"));
    const auto actual = parse_double(cell("y_actual"));
    const auto acres = parse_double(cell("acres"));
    if (!year) { diag.add(line_no, "unparseable year '" + std::string(cell("year")) + "'"); continue; }
    if (!actual) { diag.add(line_no, "unparseable y_actual '" + std::string(cell("y_actual")) + "'"); continue; }
    if (!acres) { diag.add(line_no, "unparseable acres '" + std::string(cell("acres")) + "'"); continue; }
    if (!(*actual >= 0.0)) { diag.add(line_no, "negative y_actual"); continue; }
    if (!(*acres > 0.0)) { diag.add(line_no, "acres must be positive, got " + std::string(cell("acres"))); continue; }
    r.year = static_cast<int>(*year);
    r.y_actual = *actual;
    r.unit_acres = *acres;

    bool ok = true;
    for (std::size_t k = 0; k < history_cols.size(); ++k) {
      const auto raw = history_cols[k] < cells.size() ? cells[history_cols[k]] : std::string_view{};
      if (raw.empty()) continue;
      const auto v = parse_double(raw);
      if (!v || !(*v >= 0.0)) {
        diag.add(line_no, "invalid history value h" + std::to_string(k + 1) + " '" + std::string(raw) + "'");
        ok = false;
        break;
      }
      r.y_history.push_back(*v);
    }
    if (ok) out.push_back(std::move(r));
  }
  diag.throw_if_any("yield CSV");
  return out;
}

std::vector<UnitYieldRecord> ingest_yield_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_yield_csv(in);
}

void write_yield_csv(std::ostream& out, std::span<const UnitYieldRecord> records) {
  out << "unit_id,geohash4,year,y_actual,acres";
  for (int h = 1; h <= kMaxHistoryColumns; ++h) out << ",h" << h;
  out << '\n';
  for (const auto& r : records) {
    if (r.y_history.size() > static_cast<std::size_t>(kMaxHistoryColumns)) {
      throw DomainError("unit " + r.unit_id + " has more than 10 history years");
    }
    out << r.unit_id << ',' << r.geohash4.code() << ',' << r.year << ',' << fmt_exact(r.y_actual)
        << ',' << fmt_exact(r.unit_acres);
    for (int h = 0; h < kMaxHistoryColumns; ++h) {
      out << ',';
      if (static_cast<std::size_t>(h) < r.y_history.size()) out << fmt_exact(r.y_history[h]);
    }
    out << '\n';
  }
}

RawClimate read_climate_csv(std::istream& in) {
  static constexpr std::string_view kRequired[] = {"geohash4", "date", "variable", "value"};
  std::string line;
  if (!std::getline(in, line)) throw IngestError("climate CSV: missing header row");
  const auto idx = header_index(line, kRequired, "climate CSV");
  const auto gi = idx.at("geohash4"), di = idx.at("date"), vi = idx.at("variable"),
             xi = idx.at("value");

  RawClimate out;
  Diagnostics diag;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto cells = split_csv(line);
    if (cells.size() <= std::max({gi, di, vi, xi})) {
      diag.add(line_no, "too few columns");
      continue;
    }
    DailyObservation obs;
    if (!parse_date(cells[di], obs.year, obs.month, obs.day)) {
      diag.add(line_no, "bad date '" + std::string(cells[di]) + "'");
      continue;
    }
    const auto value = parse_double(cells[xi]);
    if (!value) {
      diag.add(line_no, "unparseable value '" + std::string(cells[xi]) + "'");
      continue;
    }
    obs.value = *value;
    try {
      const Geohash g(cells[gi]);
      const auto var = climate_variable_from_string(cells[vi]);
      out[{g.code(), obs.year}][var].push_back(obs);
    } catch (const ParseError& e) {
      diag.add(line_no, e.what());
    }
  }
  diag.throw_if_any("climate CSV");
  return out;
}

RawClimate ingest_climate_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_climate_csv(in);
}

void write_climate_csv(std::ostream& out, const RawClimate& raw) {
  out << "geohash4,date,variable,value\n";
  char date[16];
  for (const auto& [key, series] : raw) {
    for (const auto& [var, observations] : series) {
      for (const auto& o : observations) {
        std::snprintf(date, sizeof date, "%04d-%02d-%02d", o.year, o.month, o.day);
        out << key.first << ',' << date << ',' << to_string(var) << ',' << fmt_exact(o.value) << '\n';
      }
    }
  }
}

std::vector<ClimateFeatureSet> climate_features_from_raw(const RawClimate& raw,
                                                         const FeatureSchema& schema,
                                                         std::span<const int> reference_years,
                                                         MissingPolicy policy) {
  schema.validate();
  std::vector<ClimateFeatureSet> absolute;
  absolute.reserve(raw.size());
  for (const auto& [key, series] : raw) {
    absolute.push_back(monthly_stats(Geohash(key.first), key.second, series, schema, policy));
  }
  const auto baseline = build_climate_baseline(absolute, reference_years);
  std::vector<ClimateFeatureSet> out;
  out.reserve(raw.size());
  for (const auto& [key, series] : raw) {
    out.push_back(summarize_climate(Geohash(key.first), key.second, series, schema, baseline, policy));
  }
  return out;
}

void write_summaries_csv(std::ostream& out, std::span<const NeighborhoodSummary> rows) {
  for (std::size_t i = 0; i < std::size(kSummaryColumns); ++i) {
    out << (i ? "," : "") << kSummaryColumns[i];
  }
  out << '\n';
  for (const auto& s : rows) {
    out << s.geohash4.code() << ',' << s.year << ',' << fmt6(s.mean_delta) << ','
        << fmt6(s.std_delta) << ',' << s.count << ',' << fmt6(s.skewness) << ','
        << fmt6(s.excess_kurtosis) << ',' << (s.approx_normal ? "true" : "false") << ','
        << (s.approx_symmetric ? "true" : "false") << ',' << fmt6(s.maize_acres) << '\n';
  }
}

std::vector<NeighborhoodSummary> read_summaries_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("summaries CSV: missing header row");
  const auto idx = header_index(line, kSummaryColumns, "summaries CSV");
  std::vector<NeighborhoodSummary> out;
  Diagnostics diag;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto cells = split_csv(line);
    auto cell = [&](const char* name) -> std::string_view {
      const auto i = idx.at(name);
      return i < cells.size() ? cells[i] : std::string_view{};
    };
    auto flag = [&](const char* name) -> std::optional<bool> {
      const auto v = cell(name);
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      return std::nullopt;
    };
    NeighborhoodSummary s;
    try {
      s.geohash4 = Geohash(cell("geohash4"));
    } catch (const ParseError& e) {
      diag.add(line_no, e.what());
      continue;
    }
    const auto year = parse_int(cell("year"));
    const auto count = parse_int(cell("count"));
    const auto mean = parse_double(cell("mean_delta"));
    const auto sd = parse_double(cell("std_delta"));
    const auto skew = parse_double(cell("skewness"));
    const auto kurt = parse_double(cell("excess_kurtosis"));
    const auto acres = parse_double(cell("maize_acres"));
    const auto normal = flag("approx_normal");
    const auto symmetric = flag("approx_symmetric");
    if (!year || !count || !mean || !sd || !skew || !kurt || !acres || !normal || !symmetric) {
      diag.add(line_no, "unparseable field");
      continue;
    }
    if (*count < 1 || *sd < 0.0 || *acres < 0.0) {
      diag.add(line_no, "count must be >= 1, std and acres >= 0");
      continue;
    }
    s.year = static_cast<int>(*year);
    s.count = static_cast<std::size_t>(*count);
    s.mean_delta = *mean;
    s.std_delta = *sd;
    s.skewness = *skew;
    s.excess_kurtosis = *kurt;
    s.maize_acres = *acres;
    s.approx_normal = *normal;
    s.approx_symmetric = *symmetric;
    out.push_back(std::move(s));
  }
  diag.throw_if_any("summaries CSV");
  return out;
}

void write_summaries_jsonl(std::ostream& out, std::span<const NeighborhoodSummary> rows) {
  for (const auto& s : rows) out << summary_to_json(s).dump() << '\n';
}

std::vector<NeighborhoodSummary> read_summaries_jsonl(std::istream& in) {
  std::vector<NeighborhoodSummary> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    try {
      const auto j = json::parse(line);
      NeighborhoodSummary s;
      s.geohash4 = Geohash(j.at("geohash4").get<std::string>());
      s.year = j.at("year").get<int>();
      s.mean_delta = j.at("mean_delta").get<double>();
      s.std_delta = j.at("std_delta").get<double>();
      s.count = j.at("count").get<std::size_t>();
      s.skewness = j.at("skewness").get<double>();
      s.excess_kurtosis = j.at("excess_kurtosis").get<double>();
      s.approx_normal = j.at("approx_normal").get<bool>();
      s.approx_symmetric = j.at("approx_symmetric").get<bool>();
      s.maize_acres = j.at("maize_acres").get<double>();
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw IngestError("summaries JSONL line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_climate_bundle(std::ostream& out, const ClimateBundle& bundle) {
  json schema;
  for (auto v : bundle.schema.variables) schema["variables"].push_back(std::string(to_string(v)));
  schema["months"] = bundle.schema.months;
  json series = json::object();
  for (const auto& s : bundle.series) {
    json rows = json::array();
    for (const auto& set : s.climate) {
      json features = json::array();
      for (double x : set.features) {
        if (std::isnan(x)) features.push_back(nullptr);
        else features.push_back(x);
      }
      rows.push_back({{"geohash4", set.geohash4.code()}, {"year", set.year}, {"features", features}});
    }
    series[std::string(to_string(s.id))] = std::move(rows);
  }
  out << json{{"format", "yieldrisk-climate"}, {"schema", schema}, {"series", series}}.dump() << '\n';
}

ClimateBundle read_climate_bundle(std::istream& in) {
  ClimateBundle bundle;
  try {
    const auto j = json::parse(in);
    for (const auto& v : j.at("schema").at("variables")) {
      bundle.schema.variables.push_back(climate_variable_from_string(v.get<std::string>()));
    }
    bundle.schema.months = j.at("schema").at("months").get<std::vector<int>>();
    bundle.schema.validate();
    for (const auto& [name, rows] : j.at("series").items()) {
      ScenarioSeries s;
      s.id = scenario_from_string(name);
      for (const auto& row : rows) {
        ClimateFeatureSet set;
        set.geohash4 = Geohash(row.at("geohash4").get<std::string>());
        set.year = row.at("year").get<int>();
        for (const auto& x : row.at("features")) {
          set.features.push_back(x.is_null() ? std::nan("") : x.get<double>());
        }
        if (set.features.size() != bundle.schema.size()) {
          throw SchemaError("climate features for " + set.geohash4.code() + " " +
                            std::to_string(set.year) + " have " +
                            std::to_string(set.features.size()) + " values, schema expects " +
                            std::to_string(bundle.schema.size()));
        }
        s.climate.push_back(std::move(set));
      }
      bundle.series.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("climate bundle: ") + e.what());
  }
  return bundle;
}

ClimateBundle load_climate_bundle(const std::string& path) {
  auto in = detail::open_input(path);
  return read_climate_bundle(in);
}

}  // namespace yieldrisk
