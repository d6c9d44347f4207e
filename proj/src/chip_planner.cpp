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

#include "clustile/chip_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clustile {

void validate(const PlannerParams& p) {
    if (!(p.detector_input > 0.0)) {
        throw ValidationError("detector_input", "must be positive");
    }
    if (!(p.scale_lo > 0.0 && p.scale_lo < p.scale_hi)) {
        throw ValidationError("scale_range", "need 0 < lo < hi");
    }
    if (p.max_partition_depth < 0) {
        throw ValidationError("max_partition_depth", "must be >= 0");
    }
    if (!(p.min_chip_side >= 0.0)) {
        throw ValidationError("min_chip_side", "must be >= 0");
    }
}

bool PaddedRegion::contains(double x, double y) const noexcept {
    return contains_point(outer, x, y) && !contains_point(inner, x, y);
}

double PaddedRegion::area() const noexcept { return clustile::area(outer) - intersection_area(outer, inner); }

double projected_scale(double object_scale, const Box& crop, double detector_input) {
    return object_scale * detector_input / crop.short_side();
}

namespace {

ChipPlan make_chip(const Box& crop, double s_hat, const PlannerParams& p, Provenance provenance, int depth) {
    ChipPlan chip;
    chip.crop = crop;
    chip.resize_factor = p.detector_input / crop.short_side();
    chip.provenance = provenance;
    chip.projected_object_scale = projected_scale(s_hat, crop, p.detector_input);
    chip.depth = depth;
    return chip;
}

std::pair<Box, Box> split_longer_side(const Box& b) {
    if (b.width() >= b.height()) {
        const double mid = 0.5 * (b.x_min() + b.x_max());
        return {Box(b.x_min(), b.y_min(), mid, b.y_max()), Box(mid, b.y_min(), b.x_max(), b.y_max())};
    }
    const double mid = 0.5 * (b.y_min() + b.y_max());
    return {Box(b.x_min(), b.y_min(), b.x_max(), mid), Box(b.x_min(), mid, b.x_max(), b.y_max())};
}

void plan_node(const Box& box, int cluster_id, int partition_index, int depth, double s_hat, const PlannerParams& p,
               const ImageExtent& extent, std::vector<ChipPlan>& out) {
    const double proj = projected_scale(s_hat, box, p.detector_input);
    const Provenance prov = Provenance::cluster(cluster_id, partition_index);

    if (proj > p.scale_hi) {
        auto grown = [&](double grow) {
            const double half_w = 0.5 * box.width() * grow;
            const double half_h = 0.5 * box.height() * grow;
            return enclosing(Box(box.center_x() - half_w, box.center_y() - half_h, box.center_x() + half_w,
                                 box.center_y() + half_h),
                             box);
        };
        double grow = proj / p.scale_hi;
        Box wanted = grown(grow);
        // rounding can leave the padded chip a few ulps above hi; widen until it is not
        for (int i = 0; i < 16 && projected_scale(s_hat, wanted, p.detector_input) > p.scale_hi; ++i) {
            grow *= 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
            wanted = grown(grow);
        }
        const Box crop = clip(wanted, extent).value_or(box);
        ChipPlan chip = make_chip(crop, s_hat, p, prov, depth);
        chip.clipped = crop != wanted;
        if (crop != box) {
            chip.padded_region = PaddedRegion{crop, box};
        }
        out.push_back(chip);
        return;
    }

    if (proj < p.scale_lo) {
        if (depth < p.max_partition_depth) {
            const auto [first, second] = split_longer_side(box);
            plan_node(first, cluster_id, 2 * partition_index + 1, depth + 1, s_hat, p, extent, out);
            plan_node(second, cluster_id, 2 * partition_index + 2, depth + 1, s_hat, p, extent, out);
            return;
        }
        ChipPlan chip = make_chip(box, s_hat, p, prov, depth);
        chip.depth_limited = true;
        out.push_back(chip);
        return;
    }

    out.push_back(make_chip(box, s_hat, p, prov, depth));
}

}  // namespace

ClusterPlan plan_cluster(const Cluster& cluster, int cluster_id, double s_hat, const PlannerParams& p,
                         const ImageExtent& extent) {
    validate(p);
    if (!(s_hat > 0.0) || !std::isfinite(s_hat)) {
        throw ValidationError("s_hat", "estimated scale must be positive");
    }
    ClusterPlan plan;
    const auto box = clip(cluster.box, extent);
    if (!box || box->short_side() < p.min_chip_side) {
        plan.warnings.push_back({cluster_id, "cluster chip below min_chip_side after clipping; dropped"});
        return plan;
    }
    if (!p.partition_and_padding) {
        plan.chips.push_back(make_chip(*box, s_hat, p, Provenance::cluster(cluster_id, 0), 0));
        return plan;
    }
    plan_node(*box, cluster_id, 0, 0, s_hat, p, extent, plan.chips);
    return plan;
}

std::vector<ChipPlan> plan_eip(const ImageExtent& extent, int rows, int cols, double overlap, double detector_input) {
    if (rows < 1 || cols < 1) {
        throw ValidationError("grid", "rows and cols must be >= 1");
    }
    if (!(overlap >= 0.0)) {
        throw ValidationError("overlap", "must be >= 0");
    }
    const double w = extent.width;
    const double h = extent.height;
    const double half = 0.5 * overlap;
    std::vector<ChipPlan> chips;
    chips.reserve(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            // interior edges come from the same expression on both sides, so tiles abut exactly
            const double x0 = c == 0 ? 0.0 : std::max(0.0, w * c / cols - half);
            const double x1 = c == cols - 1 ? w : std::min(w, w * (c + 1) / cols + half);
            const double y0 = r == 0 ? 0.0 : std::max(0.0, h * r / rows - half);
            const double y1 = r == rows - 1 ? h : std::min(h, h * (r + 1) / rows + half);
            ChipPlan chip;
            chip.chip_id = static_cast<ChipId>(chips.size());
            chip.crop = Box(x0, y0, x1, y1);
            chip.resize_factor = detector_input / chip.crop.short_side();
            chip.provenance = Provenance::grid(r, c);
            chips.push_back(chip);
        }
    }
    return chips;
}

ChipPlan plan_global(const ImageExtent& extent, double detector_input) {
    ChipPlan chip;
    chip.crop = extent.as_box();
    chip.resize_factor = detector_input / chip.crop.short_side();
    chip.provenance = Provenance::global_pass();
    return chip;
}

ClusterPlan plan_pipeline(const ImageRecord& image, std::span<const Cluster> clusters, std::span<const double> scales,
                          const PlannerParams& p) {
    validate(p);
    if (clusters.size() != scales.size()) {
        throw ValidationError("scales", "need one estimated scale per cluster");
    }
    ClusterPlan plan;
    plan.chips.push_back(plan_global(image.extent, p.detector_input));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        auto sub = plan_cluster(clusters[i], static_cast<int>(i), scales[i], p, image.extent);
        plan.chips.insert(plan.chips.end(), sub.chips.begin(), sub.chips.end());
        plan.warnings.insert(plan.warnings.end(), sub.warnings.begin(), sub.warnings.end());
    }
    for (std::size_t i = 0; i < plan.chips.size(); ++i) {
        plan.chips[i].chip_id = static_cast<ChipId>(i);
    }
    return plan;
}

}  // namespace clustile
