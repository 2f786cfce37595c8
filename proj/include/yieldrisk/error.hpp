// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace yieldrisk {

// Error categories; these map one-to-one onto the C API status codes.
enum class ErrorCode {
  Domain = 1,
  Parse,
  Ingest,
  MissingData,
  Shape,
  TrainingDivergence,
  Split,
  Config,
  Comparison,
  Io,
  Schema,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define YIELDRISK_DEFINE_ERROR(Name, Code)                              \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  }

YIELDRISK_DEFINE_ERROR(DomainError, Domain);
YIELDRISK_DEFINE_ERROR(ParseError, Parse);
YIELDRISK_DEFINE_ERROR(IngestError, Ingest);
YIELDRISK_DEFINE_ERROR(MissingDataError, MissingData);
YIELDRISK_DEFINE_ERROR(ShapeError, Shape);
YIELDRISK_DEFINE_ERROR(TrainingDivergence, TrainingDivergence);
YIELDRISK_DEFINE_ERROR(SplitError, Split);
YIELDRISK_DEFINE_ERROR(ConfigError, Config);
YIELDRISK_DEFINE_ERROR(ComparisonError, Comparison);
YIELDRISK_DEFINE_ERROR(IoError, Io);
YIELDRISK_DEFINE_ERROR(SchemaError, Schema);

#undef YIELDRISK_DEFINE_ERROR

// A ConfigError tied to one field of a config file or request body.
class FieldError : public ConfigError {
 public:
  FieldError(std::string field, const std::string& what)
      : ConfigError("'" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace yieldrisk
