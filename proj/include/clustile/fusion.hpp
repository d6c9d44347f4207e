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

#include <span>
#include <vector>

#include "clustile/chip_planner.hpp"
#include "clustile/records.hpp"

namespace clustile {

struct FusionParams {
    double nms_iou = 0.5;
    int max_final = 500;
    bool suppress_global_in_clusters = true;
    /// Region membership by box center. When false, any overlap counts.
    bool center_rule = true;
};

void validate(const FusionParams& p);

/// Chip-local detections back to the global frame. Global-pass chips keep
/// source == global; every other chip tags its detections with its chip id.
std::vector<Detection> remap(std::span<const Detection> dets, const ChipPlan& plan, bool center_rule = true);

std::vector<Detection> filter_padded(std::span<const Detection> dets);

/// Drops global detections that fall inside any of the clusters.
std::vector<Detection> suppress_global(std::span<const Detection> global_dets, std::span<const Cluster> clusters,
                                       bool center_rule = true);

/// Greedy per-category NMS. Returns survivors in rank order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

/// filter_padded -> suppress_global -> concatenate -> nms -> top max_final.
std::vector<Detection> fuse(std::span<const Detection> global_dets, std::span<const std::vector<Detection>> chip_dets,
                            std::span<const Cluster> clusters, const FusionParams& p);

}  // namespace clustile
