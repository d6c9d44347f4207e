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

#include "clustile/fusion.hpp"

#include <algorithm>
#include <map>

namespace clustile {

void validate(const FusionParams& p) {
    if (!(p.nms_iou > 0.0 && p.nms_iou < 1.0)) {
        throw ValidationError("nms_iou", "must lie in (0, 1)");
    }
    if (p.max_final < 1) {
        throw ValidationError("max_final", "must be >= 1");
    }
}

namespace {

bool in_padded(const Box& global_box, const PaddedRegion& region, bool center_rule) {
    if (center_rule) {
        return region.contains(global_box.center_x(), global_box.center_y());
    }
    return intersection_area(global_box, region.outer) > 0.0 && !contains(region.inner, global_box);
}

}  // namespace

std::vector<Detection> remap(std::span<const Detection> dets, const ChipPlan& plan, bool center_rule) {
    const Transform t = plan.to_global_transform();
    const bool is_global = plan.provenance.kind == Provenance::Kind::global_pass;
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (const auto& d : dets) {
        Detection g = d;
        g.box = to_global(d.box, t);
        g.source = is_global ? DetectionSource::global() : DetectionSource::chip(plan.chip_id);
        g.in_padded_region = !is_global && plan.padded_region && in_padded(g.box, *plan.padded_region, center_rule);
        out.push_back(g);
    }
    return out;
}

std::vector<Detection> filter_padded(std::span<const Detection> dets) {
    std::vector<Detection> out;
    std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
                 [](const Detection& d) { return !d.in_padded_region; });
    return out;
}

std::vector<Detection> suppress_global(std::span<const Detection> global_dets, std::span<const Cluster> clusters,
                                       bool center_rule) {
    std::vector<Detection> out;
    for (const auto& d : global_dets) {
        const bool inside = std::any_of(clusters.begin(), clusters.end(), [&](const Cluster& c) {
            return center_rule ? center_inside(c.box, d.box) : intersection_area(c.box, d.box) > 0.0;
        });
        if (!inside) {
            out.push_back(d);
        }
    }
    return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
    std::map<int, std::vector<Detection>> by_category;
    for (const auto& d : dets) {
        by_category[d.category_id].push_back(d);
    }

    std::vector<Detection> kept;
    for (auto& [category, group] : by_category) {
        sort_by_rank(group);
        std::vector<Detection> survivors;
        for (const auto& d : group) {
            const bool suppressed = std::any_of(survivors.begin(), survivors.end(), [&](const Detection& k) {
                return iou(k.box, d.box) > iou_threshold;
            });
            if (!suppressed) {
                survivors.push_back(d);
            }
        }
        kept.insert(kept.end(), survivors.begin(), survivors.end());
    }
    sort_by_rank(kept);
    return kept;
}

std::vector<Detection> fuse(std::span<const Detection> global_dets, std::span<const std::vector<Detection>> chip_dets,
                            std::span<const Cluster> clusters, const FusionParams& p) {
    validate(p);
    std::vector<Detection> pooled = p.suppress_global_in_clusters ? suppress_global(global_dets, clusters, p.center_rule)
                                                                  : std::vector<Detection>(global_dets.begin(),
                                                                                           global_dets.end());
    for (const auto& per_chip : chip_dets) {
        const auto unpadded = filter_padded(per_chip);
        pooled.insert(pooled.end(), unpadded.begin(), unpadded.end());
    }
    auto final_dets = nms(pooled, p.nms_iou);
    if (final_dets.size() > static_cast<std::size_t>(p.max_final)) {
        final_dets.erase(final_dets.begin() + p.max_final, final_dets.end());
    }
    return final_dets;
}

}  // namespace clustile
