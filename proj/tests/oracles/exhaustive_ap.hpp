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

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "brute_nms.hpp"
#include "clustile/records.hpp"

namespace oracle {

struct Outcome {
    double score;
    bool tp;
    bool ignored;
};

/// Direct tabulation of one (category, threshold, area range) cell: match in
/// score order, list every (recall, precision) point, and read the interpolated
/// precision at each recall level as the best precision at any recall >= level.
inline std::optional<double> tabulated_ap(const std::vector<clustile::ImageRecord>& images,
                                          const std::vector<clustile::ImageDetections>& dets, int category,
                                          double threshold, double area_lo, double area_hi, int max_dets = 500,
                                          int recall_points = 101) {
    auto in_range = [&](const clustile::Box& b) {
        const double a = b.width() * b.height();
        return a >= area_lo && a < area_hi;
    };
    std::map<clustile::ImageId, const clustile::ImageRecord*> by_image;
    for (const auto& im : images) by_image[im.image_id] = &im;
    std::map<clustile::ImageId, std::vector<clustile::Detection>> det_by_image;
    for (const auto& group : dets) {
        for (const auto& d : group.detections) {
            if (d.category_id == category) det_by_image[group.image_id].push_back(d);
        }
    }

    long long positives = 0;
    std::vector<Outcome> outcomes;
    for (const auto& [id, image] : by_image) {
        std::vector<clustile::Box> gts;
        std::vector<bool> gt_ign;
        for (const auto& a : image->annotations) {
            if (a.category_id != category) continue;
            gts.push_back(a.box);
            gt_ign.push_back(!in_range(a.box));
            if (!gt_ign.back()) ++positives;
        }
        auto mine = det_by_image[id];
        std::sort(mine.begin(), mine.end(), det_before);
        if (mine.size() > static_cast<std::size_t>(max_dets)) mine.erase(mine.begin() + max_dets, mine.end());

        std::vector<bool> taken(gts.size(), false);
        for (const auto& d : mine) {
            int best = -1;
            double best_iou = -1.0;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (taken[g]) continue;
                const double v = plain_iou(d.box, gts[g]);
                if (v < threshold) continue;
                const bool better = best < 0 || (gt_ign[static_cast<std::size_t>(best)] && !gt_ign[g]) ||
                                    (gt_ign[static_cast<std::size_t>(best)] == gt_ign[g] && v > best_iou);
                if (better) {
                    best = static_cast<int>(g);
                    best_iou = v;
                }
            }
            if (best >= 0) {
                taken[static_cast<std::size_t>(best)] = true;
                outcomes.push_back({d.score, true, gt_ign[static_cast<std::size_t>(best)]});
            } else {
                outcomes.push_back({d.score, false, !in_range(d.box)});
            }
        }
    }
    if (positives == 0) return std::nullopt;

    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const Outcome& a, const Outcome& b) { return a.score > b.score; });
    std::vector<std::pair<double, double>> curve;  // (recall, precision)
    long long tp = 0;
    long long seen = 0;
    for (const auto& o : outcomes) {
        if (o.ignored) continue;
        ++seen;
        if (o.tp) ++tp;
        curve.emplace_back(static_cast<double>(tp) / static_cast<double>(positives),
                           static_cast<double>(tp) / static_cast<double>(seen));
    }
    double total = 0.0;
    for (int i = 0; i < recall_points; ++i) {
        const double level = i == recall_points - 1 ? 1.0 : i * (1.0 / (recall_points - 1));
        double best = 0.0;
        for (const auto& [r, p] : curve) {
            if (r >= level) best = std::max(best, p);
        }
        total += best;
    }
    return total / recall_points;
}

struct Summary {
    std::optional<double> ap, ap50, ap75, ap_s, ap_m, ap_l;
};

inline Summary tabulated_summary(const std::vector<clustile::ImageRecord>& images,
                                 const std::vector<clustile::ImageDetections>& dets) {
    std::set<int> categories;
    for (const auto& im : images)
        for (const auto& a : im.annotations) categories.insert(a.category_id);
    for (const auto& g : dets)
        for (const auto& d : g.detections) categories.insert(d.category_id);

    const double inf = std::numeric_limits<double>::infinity();
    auto mean_over = [&](const std::vector<double>& thresholds, double lo, double hi) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (int c : categories) {
            for (double t : thresholds) {
                if (auto v = tabulated_ap(images, dets, c, t, lo, hi)) {
                    sum += *v;
                    ++n;
                }
            }
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    const std::vector<double> all{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    Summary s;
    s.ap = mean_over(all, 0.0, inf);
    s.ap50 = mean_over({0.5}, 0.0, inf);
    s.ap75 = mean_over({0.75}, 0.0, inf);
    s.ap_s = mean_over(all, 0.0, 32.0 * 32.0);
    s.ap_m = mean_over(all, 32.0 * 32.0, 96.0 * 96.0);
    s.ap_l = mean_over(all, 96.0 * 96.0, inf);
    return s;
}

}  // namespace oracle
