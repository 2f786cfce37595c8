// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#include "yieldrisk/geohash.hpp"

#include <array>
#include <cstdint>

#include "yieldrisk/error.hpp"

namespace yieldrisk {
namespace {

constexpr std::string_view kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";

constexpr std::array<int8_t, 128> make_decode_table() {
  std::array<int8_t, 128> table{};
  for (auto& v : table) v = -1;
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) {
    table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int8_t>(i);
  }
  return table;
}

constexpr auto kDecode = make_decode_table();

int char_value(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u < kDecode.size() ? kDecode[u] : -1;
}

}  // namespace

bool is_geohash_char(char c) noexcept { return char_value(c) >= 0; }

Geohash::Geohash(std::string_view code) : code_(code) {
  if (code_.size() < kMinGeohashPrecision || code_.size() > kMaxGeohashPrecision) {
    throw ParseError("geohash '" + code_ + "' must have 1-12 characters");
  }
  for (char c : code_) {
    if (!is_geohash_char(c)) {
      throw ParseError("geohash '" + code_ + "' contains invalid character '" +
                       std::string(1, c) + "'");
    }
  }
}

Geohash Geohash::prefix(int precision) const {
  if (precision < kMinGeohashPrecision || precision > this->precision()) {
    throw DomainError("geohash prefix length " + std::to_string(precision) +
                      " out of range for '" + code_ + "'");
  }
  return Geohash(std::string_view(code_).substr(0, static_cast<std::size_t>(precision)));
}

Geohash encode_geohash(double lat, double lon, int precision) {
  if (!(lat >= -90.0 && lat <= 90.0)) throw DomainError("latitude out of range [-90, 90]");
  if (!(lon >= -180.0 && lon <= 180.0)) throw DomainError("longitude out of range [-180, 180]");
  if (precision < kMinGeohashPrecision || precision > kMaxGeohashPrecision) {
    throw DomainError("geohash precision must be in 1..12");
  }

  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  std::string code;
  code.reserve(static_cast<std::size_t>(precision));
  bool even = true;  // even bits refine longitude
  int bit = 0, value = 0;
  while (static_cast<int>(code.size()) < precision) {
    if (even) {
      const double mid = 0.5 * (lon_lo + lon_hi);
      if (lon >= mid) {
        value = (value << 1) | 1;
        lon_lo = mid;
      } else {
        value <<= 1;
        lon_hi = mid;
      }
    } else {
      const double mid = 0.5 * (lat_lo + lat_hi);
      if (lat >= mid) {
        value = (value << 1) | 1;
        lat_lo = mid;
      } else {
        value <<= 1;
        lat_hi = mid;
      }
    }
    even = !even;
    if (++bit == 5) {
      code.push_back(kAlphabet[static_cast<std::size_t>(value)]);
      bit = 0;
      value = 0;
    }
  }
  return Geohash(code);
}

GeoBounds decode_bounds(const Geohash& g) {
  if (g.empty()) throw ParseError("cannot decode an empty geohash");
  GeoBounds box{-90.0, 90.0, -180.0, 180.0};
  bool even = true;
  for (char c : g.code()) {
    const int v = char_value(c);
    for (int shift = 4; shift >= 0; --shift) {
      const bool one = ((v >> shift) & 1) != 0;
      if (even) {
        const double mid = 0.5 * (box.lon_min + box.lon_max);
        (one ? box.lon_min : box.lon_max) = mid;
      } else {
        const double mid = 0.5 * (box.lat_min + box.lat_max);
        (one ? box.lat_min : box.lat_max) = mid;
      }
      even = !even;
    }
  }
  return box;
}

RegionId region_of(const Geohash& g) {
  if (g.precision() < kRegionPrecision) {
    throw DomainError("region_of requires a geohash with at least 3 characters, got '" +
                      g.code() + "'");
  }
  return RegionId{g.code().substr(0, kRegionPrecision)};
}

}  // namespace yieldrisk
