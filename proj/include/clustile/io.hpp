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

#include "clustile/chip_planner.hpp"
#include "clustile/evaluation.hpp"
#include "clustile/records.hpp"
#include "clustile/scale.hpp"

namespace clustile {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON. The message carries the line and column of the failure.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, int column, const std::string& detail);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Rounds to 6 fractional digits, the precision used for coordinates on disk.
double round6(double v) noexcept;

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// COCO-style dataset: {"images": [...], "annotations": [...], "categories": [...]}.
// Boxes are [x, y, w, h] on disk. Images come back sorted by id, annotations by object id.
std::vector<ImageRecord> parse_dataset(const std::string& text, const std::string& source = "<memory>");
std::string dump_dataset(const std::vector<ImageRecord>& images);
std::vector<ImageRecord> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<ImageRecord>& images, const std::filesystem::path& path);

// Flat COCO result array: [{"image_id", "category_id", "bbox", "score"}, ...] plus
// optional "source" ("global" | "chip"), "chip_id" and "in_padded_region" fields.
// Grouped by image id ascending, each group in rank order.
std::vector<ImageDetections> parse_detections(const std::string& text, const std::string& source = "<memory>");
std::string dump_detections(const std::vector<ImageDetections>& dets);
std::vector<ImageDetections> load_detections(const std::filesystem::path& path);
void save_detections(const std::vector<ImageDetections>& dets, const std::filesystem::path& path);

struct PlanFile {
    std::string strategy;
    std::vector<ImagePlan> images;
};

std::string dump_plans(const PlanFile& plans);
PlanFile parse_plans(const std::string& text, const std::string& source = "<memory>");
PlanFile load_plans(const std::filesystem::path& path);
void save_plans(const PlanFile& plans, const std::filesystem::path& path);

std::string dump_regressor(const OffsetRegressor& model);
OffsetRegressor parse_regressor(const std::string& text, const std::string& source = "<memory>");

std::string dump_eval(const EvalResult& result);

}  // namespace clustile
