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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustile/records.hpp"

namespace clustile {

struct PlannerParams {
    /// Short side of the detector input, in pixels.
    double detector_input = 600.0;
    double scale_lo = 70.0;
    double scale_hi = 280.0;
    int max_partition_depth = 2;
    double min_chip_side = 64.0;
    /// When false, cluster chips are forwarded as-is (no padding, no partitioning).
    bool partition_and_padding = true;
};

void validate(const PlannerParams& p);

struct Provenance {
    enum class Kind { global_pass, cluster, grid };

    Kind kind = Kind::global_pass;
    int cluster_id = 0;
    /// Heap-style path index: root 0, children 2i+1 and 2i+2.
    int partition_index = 0;
    int row = 0;
    int col = 0;

    static Provenance global_pass() { return {}; }
    static Provenance cluster(int cluster_id, int partition_index) {
        return {Kind::cluster, cluster_id, partition_index, 0, 0};
    }
    static Provenance grid(int row, int col) { return {Kind::grid, 0, 0, row, col}; }

    bool operator==(const Provenance&) const = default;
};

/// Region added around the original cluster by padding: inside `outer` but not
/// inside `inner`.
struct PaddedRegion {
    Box outer;
    Box inner;

    bool contains(double x, double y) const noexcept;
    double area() const noexcept;
    bool operator==(const PaddedRegion&) const = default;
};

struct ChipPlan {
    ChipId chip_id = 0;
    Box crop{0, 0, 1, 1};
    /// detector_input / crop.short_side()
    double resize_factor = 1.0;
    std::optional<PaddedRegion> padded_region;
    Provenance provenance;
    std::optional<double> projected_object_scale;
    int depth = 0;
    bool depth_limited = false;
    bool clipped = false;

    /// Chip-local (detector input) to global frame.
    Transform to_global_transform() const { return Transform(crop.x_min(), crop.y_min(), 1.0 / resize_factor); }

    bool operator==(const ChipPlan&) const = default;
};

struct PlanWarning {
    int cluster_id = 0;
    std::string message;
};

struct ClusterPlan {
    std::vector<ChipPlan> chips;
    std::vector<PlanWarning> warnings;
};

/// Everything planned for one image: the clusters the chips came from and the chips.
struct ImagePlan {
    ImageId image_id = 0;
    ImageExtent extent{1, 1};
    std::vector<Cluster> clusters;
    std::vector<ChipPlan> chips;
    std::vector<PlanWarning> warnings;
};

double projected_scale(double object_scale, const Box& crop, double detector_input);

/// Partition-and-padding for one cluster. Chips whose projected object scale
/// exceeds the range are padded symmetrically so it lands on the upper bound;
/// chips below the range are split into two equal halves across their longer
/// side and re-evaluated, up to max_partition_depth.
ClusterPlan plan_cluster(const Cluster& cluster, int cluster_id, double s_hat, const PlannerParams& p,
                         const ImageExtent& extent);

/// rows x cols grid over the image; neighbouring chips share `overlap` pixels.
std::vector<ChipPlan> plan_eip(const ImageExtent& extent, int rows, int cols, double overlap,
                               double detector_input = 600.0);

ChipPlan plan_global(const ImageExtent& extent, double detector_input);

/// Global pass followed by the cluster chips, with chip ids assigned in order.
/// `scales[i]` is the estimated object scale for `clusters[i]`.
ClusterPlan plan_pipeline(const ImageRecord& image, std::span<const Cluster> clusters, std::span<const double> scales,
                          const PlannerParams& p);

}  // namespace clustile
