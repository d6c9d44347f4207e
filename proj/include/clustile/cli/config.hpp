/*
 Copyright 2026 The Clustile Authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "clustile/evaluation.hpp"
#include "clustile/pipeline.hpp"
#include "clustile/simulator.hpp"

namespace clustile::cli {

/// Bad configuration: unknown key, wrong type, invalid enum or out-of-range value.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what);

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct ReportSettings {
    /// Strategy whose cluster chips are histogrammed.
    Strategy strategy;
    /// Uniform grid the cluster chips are compared against.
    int grid_rows = 4;
    int grid_cols = 6;
    ChipTypeParams chip_types;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out = "out";
    /// Existing dataset to use instead of simulated scenes.
    std::optional<std::filesystem::path> dataset;
    int images = 100;
    Strategy strategy;
    std::vector<Strategy> compare;
    std::vector<int> topn_sweep;
    SceneParams scene;
    PipelineConfig pipeline;
    ReportSettings report;
    /// The effective config document this was built from.
    nlohmann::ordered_json source;
};

/// The built-in defaults as a config document.
nlohmann::ordered_json default_config();

/// Overlays `patch` onto `base` (RFC 7386 merge patch).
void merge_config(nlohmann::ordered_json& base, const nlohmann::ordered_json& patch);

/// Sets a dotted key such as "scene.width". The value is parsed as JSON when it
/// parses, otherwise taken as a string.
void set_dotted(nlohmann::ordered_json& config, const std::string& key, const std::string& value);

/// Parses "key=value" for set_dotted.
void apply_assignment(nlohmann::ordered_json& config, const std::string& assignment);

/// Strict conversion: every key must be known and well typed.
RunConfig to_run_config(const nlohmann::ordered_json& config);

/// Resolves a strategy string. Bare names take topn / eip grid from the config.
Strategy resolve_strategy(const std::string& spec, const nlohmann::ordered_json& config);

}  // namespace clustile::cli
