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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "clustile/cli/config.hpp"
#include "clustile/evaluation.hpp"
#include "clustile/pipeline.hpp"

namespace clustile::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
    exit_missing_input = 3,
    exit_invalid_input = 4,
    exit_stage_failure = 5,
};

/// A stage input that does not exist yet.
class MissingInputError : public std::runtime_error {
public:
    MissingInputError(const std::filesystem::path& path, const std::string& hint);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// File locations under the output directory.
struct Layout {
    std::filesystem::path root;

    std::filesystem::path dataset() const { return root / "dataset.json"; }
    std::filesystem::path global_detections() const { return root / "global_detections.json"; }
    std::filesystem::path config() const { return root / "config.json"; }
    std::filesystem::path strategy_dir(const Strategy& s) const { return root / s.name(); }
    std::filesystem::path plans(const Strategy& s) const { return strategy_dir(s) / "plans.json"; }
    std::filesystem::path scale_model(const Strategy& s) const { return strategy_dir(s) / "scale_model.json"; }
    std::filesystem::path raw_detections(const Strategy& s) const { return strategy_dir(s) / "raw_detections.json"; }
    std::filesystem::path detections(const Strategy& s) const { return strategy_dir(s) / "detections.json"; }
    std::filesystem::path eval_json(const Strategy& s) const { return strategy_dir(s) / "eval.json"; }
    std::filesystem::path eval_txt(const Strategy& s) const { return strategy_dir(s) / "eval.txt"; }
};

/// Writes the simulated dataset (or a copy of config.dataset) to out/dataset.json.
std::vector<ImageRecord> cmd_simulate(const RunConfig& rc);
/// Chip plans for one strategy; runs the initial global pass when it is missing.
void cmd_plan(const RunConfig& rc, const Strategy& s);
/// Simulated detector over every planned chip, in chip-local frames.
void cmd_detect(const RunConfig& rc, const Strategy& s);
/// Remaps and fuses raw detections. Reads only files.
void cmd_fuse(const RunConfig& rc, const Strategy& s);
EvalResult cmd_eval(const RunConfig& rc, const Strategy& s);
/// Runs every stage for each compared strategy plus the TopN sweep.
void cmd_compare(const RunConfig& rc);
/// Chip-type histogram of cluster chips against a uniform grid.
void cmd_report(const RunConfig& rc);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace clustile::cli
