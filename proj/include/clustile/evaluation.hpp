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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustile/chip_planner.hpp"
#include "clustile/records.hpp"

namespace clustile {

struct AreaRange {
    double lo = 0.0;
    double hi = 1e10;
};

struct EvalParams {
    std::vector<double> iou_thresholds{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    /// Bucket edges in squared pixels: small < 32^2 <= medium < 96^2 <= large.
    double small_max_area = 32.0 * 32.0;
    double medium_max_area = 96.0 * 96.0;
    int max_dets = 500;
    int recall_points = 101;
};

void validate(const EvalParams& p);

struct EvalResult {
    std::optional<double> ap;
    std::optional<double> ap50;
    std::optional<double> ap75;
    std::optional<double> ap_s;
    std::optional<double> ap_m;
    std::optional<double> ap_l;
    long long images_forwarded = 0;
    std::map<int, std::optional<double>> per_category_ap;
};

/// COCO-protocol bounding-box AP. `detections` and `images` are matched by image_id.
EvalResult coco_ap(std::span<const ImageDetections> detections, std::span<const ImageRecord> images,
                   const EvalParams& p = {});

/// Interpolated precision averaged over the recall grid, for one (category,
/// threshold, area range) cell. Undefined when no ground truth falls in range.
std::optional<double> coco_ap_cell(std::span<const ImageDetections> detections, std::span<const ImageRecord> images,
                                   int category_id, double iou_threshold, const AreaRange& range,
                                   const EvalParams& p = {});

struct ChipTypeParams {
    int sparse_max = 2;
    int common_max = 10;
};

void validate(const ChipTypeParams& p);

struct ChipTypeCounts {
    long long sparse = 0;
    long long common = 0;
    long long clustered = 0;
    long long zero = 0;

    long long total() const noexcept { return sparse + common + clustered; }
    ChipTypeCounts& operator+=(const ChipTypeCounts& o) noexcept;
};

struct ChipTypeHistogram {
    double sparse = 0.0;
    double common = 0.0;
    double clustered = 0.0;
    /// Share of chips with no objects at all; these are also counted as sparse.
    double zero = 0.0;
};

/// An object belongs to a chip when its centre lies in the crop ([min, max) per axis).
ChipTypeCounts count_chip_types(std::span<const ChipPlan> plans, std::span<const Annotation> annotations,
                                const ChipTypeParams& p);
ChipTypeHistogram to_fractions(const ChipTypeCounts& counts);
ChipTypeHistogram chip_type_histogram(std::span<const ChipPlan> plans, std::span<const Annotation> annotations,
                                      const ChipTypeParams& p);

long long count_forwarded(std::span<const std::vector<ChipPlan>> plans_per_image);

/// Columns in ablation-table order: #img AP AP50 AP75 APs APm APl.
std::string format_table(std::span<const std::pair<std::string, EvalResult>> rows);
std::string format_metric(const std::optional<double>& v);

}  // namespace clustile
