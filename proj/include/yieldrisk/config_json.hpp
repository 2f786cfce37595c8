// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON -> domain config parsing shared by batch jobs and the HTTP service.
// Missing keys take defaults; wrong types and invalid values throw FieldError
// naming the offending key.

#pragma once

#include <json.hpp>

#include "yieldrisk/coverage.hpp"
#include "yieldrisk/regressor.hpp"
#include "yieldrisk/simulation.hpp"
#include "yieldrisk/synthetic.hpp"

namespace yieldrisk {

CoveragePolicy coverage_from_json(const nlohmann::json& j);
nlohmann::json coverage_to_json(const CoveragePolicy& c);

/// Everything except `scenario`, which callers set.
ScenarioSpec scenario_spec_from_json(const nlohmann::json& j, const std::string& base_dir = ".");

RegressorConfig regressor_config_from_json(const nlohmann::json& j);
TrainOptions train_options_from_json(const nlohmann::json& j);
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);
FeatureSchema feature_schema_from_json(const nlohmann::json& j);

}  // namespace yieldrisk
