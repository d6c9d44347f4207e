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
#include <span>
#include <utility>
#include <vector>

#include "clustile/chip_planner.hpp"
#include "clustile/records.hpp"

namespace clustile {

struct IntRange {
    int lo = 0;
    int hi = 0;

    bool operator==(const IntRange&) const = default;
};

struct LogNormal {
    double median = 32.0;
    double sigma = 0.5;
};

/// Synthetic clustered scene. Cluster centres are uniform over the image; members
/// are Gaussian around their centre with std `cluster_spread` per axis. Each
/// cluster draws its own median object scale (log-normal around
/// object_scale.median with `cluster_scale_sigma`), and members scatter around
/// it with object_scale.sigma.
struct SceneParams {
    int width = 1500;
    int height = 1000;
    IntRange n_clusters{3, 5};
    IntRange objects_per_cluster{10, 22};
    double cluster_spread = 40.0;
    IntRange background_objects{10, 10};
    LogNormal object_scale{};
    double cluster_scale_sigma = 0.25;
    /// Std of log(width / height) per object.
    double aspect_sigma = 0.3;
    int categories = 3;
    std::uint64_t seed = 1;
};

void validate(const SceneParams& p);

struct SceneLayout {
    ImageRecord record;
    std::vector<std::pair<double, double>> cluster_centers;
    /// Index into cluster_centers per annotation, -1 for background objects.
    std::vector<int> cluster_of;
};

SceneLayout generate_scene_layout(const SceneParams& p, ImageId image_id);
ImageRecord generate_scene(const SceneParams& p, ImageId image_id);
/// Images 1..count.
std::vector<ImageRecord> generate_dataset(const SceneParams& p, int count);

struct KumaraswamyParams {
    double a = 2.0;
    double b = 1.0;
};

/// Scores and recall of a stand-in detector, driven by object size in the
/// detector's input space.
struct DetectorModel {
    /// (projected scale in px, detection probability), scale strictly increasing.
    std::vector<std::pair<double, double>> recall_curve{{8.0, 0.0}, {48.0, 0.95}};
    /// Corner jitter std as a fraction of the object scale.
    double loc_noise_frac = 0.05;
    KumaraswamyParams score{4.0, 1.5};
    /// Expected false positives per forwarded chip.
    double fp_rate = 2.0;
    KumaraswamyParams fp_score{1.5, 4.0};
    /// Side range of false-positive boxes in detector input pixels.
    double fp_min_side = 10.0;
    double fp_max_side = 60.0;
    int categories = 3;
    /// Objects less visible than this inside the crop are not detected.
    double truncation_threshold = 0.25;
    /// Emit a confident false positive on truncated fragments below the threshold.
    bool fragment_fp = false;
    std::uint64_t seed = 1;
};

void validate(const DetectorModel& m);

double recall_at(const DetectorModel& m, double projected_scale) noexcept;

/// Seed for one (image, chip) pair: derive_seed(m.seed, {image_id, kind,
/// cluster_id, partition_index, row, col}).
std::uint64_t detection_seed(const DetectorModel& m, ImageId image_id, const Provenance& provenance) noexcept;

/// Detections in the chip's detector-input frame (origin at the crop corner,
/// scaled by resize_factor).
std::vector<Detection> simulate_detect(const ImageRecord& image, const ChipPlan& plan, const DetectorModel& m);

}  // namespace clustile
