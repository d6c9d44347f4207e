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

#include "clustile/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "clustile/random.hpp"
#include "clustile/scale.hpp"

namespace clustile {

void validate(const SceneParams& p) {
    ImageExtent(p.width, p.height);
    for (const auto& [name, r] : {std::pair{"n_clusters", p.n_clusters}, std::pair{"objects_per_cluster",
                                                                                   p.objects_per_cluster},
                                  std::pair{"background_objects", p.background_objects}}) {
        if (r.lo < 0 || r.hi < r.lo) {
            throw ValidationError(name, "need 0 <= lo <= hi");
        }
    }
    if (!(p.cluster_spread > 0.0)) {
        throw ValidationError("cluster_spread", "must be positive");
    }
    if (!(p.object_scale.median > 0.0) || !(p.object_scale.sigma >= 0.0) || !(p.cluster_scale_sigma >= 0.0) ||
        !(p.aspect_sigma >= 0.0)) {
        throw ValidationError("object_scale", "median must be positive and sigmas non-negative");
    }
    if (p.categories < 1) {
        throw ValidationError("categories", "must be >= 1");
    }
}

namespace {

constexpr int kPlacementAttempts = 8;

std::optional<Box> draw_object(Rng& rng, double cx, double cy, double median, const SceneParams& p,
                               const ImageExtent& extent) {
    const double s = rng.log_normal(median, p.object_scale.sigma);
    const double aspect = std::exp(p.aspect_sigma * rng.normal());
    const double w = s * std::sqrt(aspect);
    const double h = s / std::sqrt(aspect);
    const auto clipped = clip(Box(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h), extent);
    if (!clipped || clipped->width() < 1.0 || clipped->height() < 1.0) {
        return std::nullopt;
    }
    return clipped;
}

}  // namespace

SceneLayout generate_scene_layout(const SceneParams& p, ImageId image_id) {
    validate(p);
    const ImageExtent extent(p.width, p.height);
    Rng rng(derive_seed(p.seed, {static_cast<std::uint64_t>(image_id)}));

    SceneLayout layout;
    layout.record.image_id = image_id;
    layout.record.extent = extent;

    ObjectId next_id = 1;
    auto add = [&](const Box& box, int cluster) {
        const int category = static_cast<int>(rng.uniform_int(1, p.categories));
        layout.record.annotations.push_back({box, category, next_id++});
        layout.cluster_of.push_back(cluster);
    };

    // keep centres far enough inside that most of the Gaussian mass stays in frame
    const double inset_x = std::min(2.0 * p.cluster_spread, 0.25 * p.width);
    const double inset_y = std::min(2.0 * p.cluster_spread, 0.25 * p.height);
    const auto clusters = static_cast<int>(rng.uniform_int(p.n_clusters.lo, p.n_clusters.hi));
    for (int c = 0; c < clusters; ++c) {
        const double cx = rng.uniform(inset_x, p.width - inset_x);
        const double cy = rng.uniform(inset_y, p.height - inset_y);
        const double median = rng.log_normal(p.object_scale.median, p.cluster_scale_sigma);
        layout.cluster_centers.emplace_back(cx, cy);
        const auto members = static_cast<int>(rng.uniform_int(p.objects_per_cluster.lo, p.objects_per_cluster.hi));
        for (int m = 0; m < members; ++m) {
            for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
                const double x = rng.normal(cx, p.cluster_spread);
                const double y = rng.normal(cy, p.cluster_spread);
                if (const auto box = draw_object(rng, x, y, median, p, extent)) {
                    add(*box, c);
                    break;
                }
            }
        }
    }

    const auto background = static_cast<int>(rng.uniform_int(p.background_objects.lo, p.background_objects.hi));
    for (int b = 0; b < background; ++b) {
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            const double x = rng.uniform(0.0, p.width);
            const double y = rng.uniform(0.0, p.height);
            const double median = rng.log_normal(p.object_scale.median, p.cluster_scale_sigma);
            if (const auto box = draw_object(rng, x, y, median, p, extent)) {
                add(*box, -1);
                break;
            }
        }
    }
    return layout;
}

ImageRecord generate_scene(const SceneParams& p, ImageId image_id) {
    return generate_scene_layout(p, image_id).record;
}

std::vector<ImageRecord> generate_dataset(const SceneParams& p, int count) {
    std::vector<ImageRecord> images;
    images.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 1; i <= count; ++i) {
        images.push_back(generate_scene(p, i));
    }
    return images;
}

void validate(const DetectorModel& m) {
    if (m.recall_curve.empty()) {
        throw ValidationError("recall_curve", "needs at least one point");
    }
    for (std::size_t i = 0; i < m.recall_curve.size(); ++i) {
        const auto [scale, prob] = m.recall_curve[i];
        if (!(prob >= 0.0 && prob <= 1.0)) {
            throw ValidationError("recall_curve", "probabilities must lie in [0, 1]");
        }
        if (i > 0) {
            if (!(scale > m.recall_curve[i - 1].first)) {
                throw ValidationError("recall_curve", "scales must be strictly increasing");
            }
            if (prob < m.recall_curve[i - 1].second) {
                throw ValidationError("recall_curve", "must be non-decreasing");
            }
        }
    }
    if (!(m.loc_noise_frac >= 0.0)) {
        throw ValidationError("loc_noise_frac", "must be >= 0");
    }
    if (!(m.fp_rate >= 0.0)) {
        throw ValidationError("fp_rate", "must be >= 0");
    }
    if (!(m.score.a > 0.0 && m.score.b > 0.0 && m.fp_score.a > 0.0 && m.fp_score.b > 0.0)) {
        throw ValidationError("score", "shape parameters must be positive");
    }
    if (!(m.fp_min_side > 0.0 && m.fp_min_side <= m.fp_max_side)) {
        throw ValidationError("fp_side", "need 0 < min <= max");
    }
    if (m.categories < 1) {
        throw ValidationError("categories", "must be >= 1");
    }
    if (!(m.truncation_threshold >= 0.0 && m.truncation_threshold <= 1.0)) {
        throw ValidationError("truncation_threshold", "must lie in [0, 1]");
    }
}

double recall_at(const DetectorModel& m, double projected_scale) noexcept {
    const auto& curve = m.recall_curve;
    if (projected_scale <= curve.front().first) {
        return curve.front().second;
    }
    if (projected_scale >= curve.back().first) {
        return curve.back().second;
    }
    const auto hi = std::upper_bound(curve.begin(), curve.end(), projected_scale,
                                     [](double s, const auto& pt) { return s < pt.first; });
    const auto lo = hi - 1;
    const double frac = (projected_scale - lo->first) / (hi->first - lo->first);
    return lo->second + frac * (hi->second - lo->second);
}

std::uint64_t detection_seed(const DetectorModel& m, ImageId image_id, const Provenance& provenance) noexcept {
    return derive_seed(m.seed, {static_cast<std::uint64_t>(image_id), static_cast<std::uint64_t>(provenance.kind),
                                static_cast<std::uint64_t>(provenance.cluster_id),
                                static_cast<std::uint64_t>(provenance.partition_index),
                                static_cast<std::uint64_t>(provenance.row),
                                static_cast<std::uint64_t>(provenance.col)});
}

std::vector<Detection> simulate_detect(const ImageRecord& image, const ChipPlan& plan, const DetectorModel& m) {
    validate(m);
    Rng rng(detection_seed(m, image.image_id, plan.provenance));
    const Transform to_global_t = plan.to_global_transform();
    const double f = plan.resize_factor;
    const Box local_frame(0.0, 0.0, plan.crop.width() * f, plan.crop.height() * f);

    std::vector<Detection> dets;
    auto emit = [&](const Box& local_box, double jitter_std, int category, double score) {
        // a fixed number of draws per call keeps the stream aligned
        const double dx0 = rng.normal() * jitter_std;
        const double dy0 = rng.normal() * jitter_std;
        const double dx1 = rng.normal() * jitter_std;
        const double dy1 = rng.normal() * jitter_std;
        const double x0 = local_box.x_min() + dx0;
        const double y0 = local_box.y_min() + dy0;
        const double x1 = local_box.x_max() + dx1;
        const double y1 = local_box.y_max() + dy1;
        if (!(x0 < x1) || !(y0 < y1)) {
            return;
        }
        if (const auto clipped = intersection(Box(x0, y0, x1, y1), local_frame)) {
            dets.push_back({*clipped, category, score, DetectionSource::global(), false});
        }
    };

    for (const auto& a : image.annotations) {
        const auto visible = intersection(a.box, plan.crop);
        if (!visible) {
            continue;
        }
        const double u = rng.uniform();
        const double score = rng.kumaraswamy(m.score.a, m.score.b);
        const double visible_fraction = area(*visible) / area(a.box);
        const Box local = to_local(*visible, to_global_t);
        const double projected = object_scale(local);
        if (u >= recall_at(m, projected)) {
            continue;
        }
        if (visible_fraction < m.truncation_threshold && !m.fragment_fp) {
            continue;
        }
        emit(local, m.loc_noise_frac * projected, a.category_id, score);
    }

    const int false_positives = rng.poisson(m.fp_rate);
    for (int i = 0; i < false_positives; ++i) {
        const double side = std::exp(rng.uniform(std::log(m.fp_min_side), std::log(m.fp_max_side)));
        const double cx = rng.uniform(0.0, local_frame.width());
        const double cy = rng.uniform(0.0, local_frame.height());
        const int category = static_cast<int>(rng.uniform_int(1, m.categories));
        const double score = rng.kumaraswamy(m.fp_score.a, m.fp_score.b);
        emit(Box(cx - 0.5 * side, cy - 0.5 * side, cx + 0.5 * side, cy + 0.5 * side), 0.0, category, score);
    }
    return dets;
}

}  // namespace clustile
