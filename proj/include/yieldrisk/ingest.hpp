// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats.
//
//   yields CSV    unit_id,geohash4,year,y_actual,acres,h1..h10
//                 h1 is the oldest history year, h10 the most recent; history
//                 cells may be blank. Values are written at full precision.
//   climate CSV   geohash4,date,variable,value   (date is YYYY-MM-DD)
//   summaries     CSV and line-delimited JSON, numbers at 6 significant digits
//   climate JSON  {"schema": {...}, "series": {"<scenario>": [{geohash4, year,
//                 features: [...]}]}}, missing cells are null

#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "yieldrisk/climate.hpp"
#include "yieldrisk/summary.hpp"

namespace yieldrisk {

inline constexpr int kMaxHistoryColumns = 10;

std::vector<UnitYieldRecord> read_yield_csv(std::istream& in);
std::vector<UnitYieldRecord> ingest_yield_csv(const std::string& path);
void write_yield_csv(std::ostream& out, std::span<const UnitYieldRecord> records);

// Daily climate observations keyed by (geohash, year).
using RawClimate = std::map<std::pair<std::string, int>, DailySeries>;

RawClimate read_climate_csv(std::istream& in);
RawClimate ingest_climate_csv(const std::string& path);
void write_climate_csv(std::ostream& out, const RawClimate& raw);

/// Turns raw daily observations into feature deltas, baselined per geohash on
/// `reference_years` (all years when empty).
std::vector<ClimateFeatureSet> climate_features_from_raw(const RawClimate& raw,
                                                         const FeatureSchema& schema,
                                                         std::span<const int> reference_years,
                                                         MissingPolicy policy);

void write_summaries_csv(std::ostream& out, std::span<const NeighborhoodSummary> rows);
std::vector<NeighborhoodSummary> read_summaries_csv(std::istream& in);
void write_summaries_jsonl(std::ostream& out, std::span<const NeighborhoodSummary> rows);
std::vector<NeighborhoodSummary> read_summaries_jsonl(std::istream& in);

void write_climate_bundle(std::ostream& out, const ClimateBundle& bundle);
ClimateBundle read_climate_bundle(std::istream& in);
ClimateBundle load_climate_bundle(const std::string& path);

}  // namespace yieldrisk
