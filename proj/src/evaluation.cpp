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

#include "clustile/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace clustile {

void validate(const EvalParams& p) {
    if (p.iou_thresholds.empty()) {
        throw ValidationError("iou_thresholds", "need at least one threshold");
    }
    for (std::size_t i = 0; i < p.iou_thresholds.size(); ++i) {
        const double t = p.iou_thresholds[i];
        if (!(t > 0.0 && t < 1.0) || (i > 0 && !(t > p.iou_thresholds[i - 1]))) {
            throw ValidationError("iou_thresholds", "must be strictly increasing within (0, 1)");
        }
    }
    if (!(p.small_max_area > 0.0 && p.small_max_area < p.medium_max_area)) {
        throw ValidationError("size_buckets", "need 0 < small < medium");
    }
    if (p.max_dets < 1) {
        throw ValidationError("max_dets", "must be >= 1");
    }
    if (p.recall_points < 2) {
        throw ValidationError("recall_points", "must be >= 2");
    }
}

namespace {

bool in_range(double a, const AreaRange& r) { return r.lo <= a && a < r.hi; }

/// One (image, category) cell with its IoU matrix computed once.
struct Cell {
    std::vector<Box> gts;
    std::vector<Detection> dets;
    std::vector<std::vector<double>> ious;  // [det][gt]
};

struct MatchedDet {
    double score;
    bool matched;
    bool ignored;
};

using CellMap = std::map<std::pair<ImageId, int>, Cell>;

CellMap build_cells(std::span<const ImageDetections> detections, std::span<const ImageRecord> images,
                    const EvalParams& p) {
    CellMap cells;
    std::unordered_map<ImageId, bool> known;
    for (const auto& img : images) {
        known[img.image_id] = true;
        for (const auto& a : img.annotations) {
            cells[{img.image_id, a.category_id}].gts.push_back(a.box);
        }
    }
    for (const auto& per_image : detections) {
        if (!known.count(per_image.image_id)) {
            continue;
        }
        for (const auto& d : per_image.detections) {
            cells[{per_image.image_id, d.category_id}].dets.push_back(d);
        }
    }
    for (auto& [key, cell] : cells) {
        sort_by_rank(cell.dets);
        if (cell.dets.size() > static_cast<std::size_t>(p.max_dets)) {
            cell.dets.erase(cell.dets.begin() + p.max_dets, cell.dets.end());
        }
        cell.ious.assign(cell.dets.size(), std::vector<double>(cell.gts.size(), 0.0));
        for (std::size_t d = 0; d < cell.dets.size(); ++d) {
            for (std::size_t g = 0; g < cell.gts.size(); ++g) {
                cell.ious[d][g] = iou(cell.dets[d].box, cell.gts[g]);
            }
        }
    }
    return cells;
}

/// Greedy matching in rank order. Non-ignored ground truth is preferred; a
/// detection matched to an ignored object is itself ignored, as are unmatched
/// detections whose own area falls outside the range.
long long match_cell(const Cell& cell, double threshold, const AreaRange& range, std::vector<MatchedDet>& out) {
    std::vector<std::size_t> order(cell.gts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<bool> gt_ignored(cell.gts.size());
    long long positives = 0;
    for (std::size_t g = 0; g < cell.gts.size(); ++g) {
        gt_ignored[g] = !in_range(area(cell.gts[g]), range);
        positives += gt_ignored[g] ? 0 : 1;
    }
    std::stable_partition(order.begin(), order.end(), [&](std::size_t g) { return !gt_ignored[g]; });

    std::vector<bool> gt_taken(cell.gts.size(), false);
    for (std::size_t d = 0; d < cell.dets.size(); ++d) {
        std::ptrdiff_t best = -1;
        double best_iou = threshold;
        for (const std::size_t g : order) {
            if (gt_taken[g]) {
                continue;
            }
            if (best >= 0 && !gt_ignored[static_cast<std::size_t>(best)] && gt_ignored[g]) {
                break;
            }
            const double v = cell.ious[d][g];
            if (v < threshold || (best >= 0 && !(v > best_iou))) {
                continue;
            }
            best = static_cast<std::ptrdiff_t>(g);
            best_iou = v;
        }
        MatchedDet m{cell.dets[d].score, best >= 0, false};
        if (best >= 0) {
            gt_taken[static_cast<std::size_t>(best)] = true;
            m.ignored = gt_ignored[static_cast<std::size_t>(best)];
        } else {
            m.ignored = !in_range(area(cell.dets[d].box), range);
        }
        out.push_back(m);
    }
    return positives;
}

std::optional<double> average_precision(std::vector<MatchedDet>& dets, long long positives, int recall_points) {
    if (positives == 0) {
        return std::nullopt;
    }
    std::stable_sort(dets.begin(), dets.end(), [](const MatchedDet& a, const MatchedDet& b) { return a.score > b.score; });
    std::vector<double> recall;
    std::vector<double> precision;
    long long tp = 0;
    long long fp = 0;
    for (const auto& d : dets) {
        if (d.ignored) {
            continue;
        }
        (d.matched ? tp : fp) += 1;
        recall.push_back(static_cast<double>(tp) / static_cast<double>(positives));
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    }
    for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    const double step = 1.0 / static_cast<double>(recall_points - 1);
    double sum = 0.0;
    for (int r = 0; r < recall_points; ++r) {
        const double target = r == recall_points - 1 ? 1.0 : r * step;
        const auto it = std::lower_bound(recall.begin(), recall.end(), target);
        if (it != recall.end()) {
            sum += precision[static_cast<std::size_t>(it - recall.begin())];
        }
    }
    return sum / recall_points;
}

std::optional<double> cell_ap(const CellMap& cells, int category, double threshold, const AreaRange& range,
                              const EvalParams& p) {
    std::vector<MatchedDet> dets;
    long long positives = 0;
    for (const auto& [key, cell] : cells) {
        if (key.second == category) {
            positives += match_cell(cell, threshold, range, dets);
        }
    }
    return average_precision(dets, positives, p.recall_points);
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    int n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / n;
}

}  // namespace

std::optional<double> coco_ap_cell(std::span<const ImageDetections> detections, std::span<const ImageRecord> images,
                                   int category_id, double iou_threshold, const AreaRange& range,
                                   const EvalParams& p) {
    validate(p);
    return cell_ap(build_cells(detections, images, p), category_id, iou_threshold, range, p);
}

EvalResult coco_ap(std::span<const ImageDetections> detections, std::span<const ImageRecord> images,
                   const EvalParams& p) {
    validate(p);
    const CellMap cells = build_cells(detections, images, p);
    std::vector<int> categories;
    for (const auto& [key, cell] : cells) {
        categories.push_back(key.second);
    }
    std::sort(categories.begin(), categories.end());
    categories.erase(std::unique(categories.begin(), categories.end()), categories.end());

    const AreaRange all{0.0, std::numeric_limits<double>::infinity()};
    const AreaRange small{0.0, p.small_max_area};
    const AreaRange medium{p.small_max_area, p.medium_max_area};
    const AreaRange large{p.medium_max_area, std::numeric_limits<double>::infinity()};

    auto threshold_index = [&](double t) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < p.iou_thresholds.size(); ++i) {
            if (std::abs(p.iou_thresholds[i] - t) < 1e-9) {
                return i;
            }
        }
        return std::nullopt;
    };

    EvalResult result;
    std::vector<std::optional<double>> all_cells;
    std::vector<std::optional<double>> at50;
    std::vector<std::optional<double>> at75;
    std::vector<std::optional<double>> s_cells;
    std::vector<std::optional<double>> m_cells;
    std::vector<std::optional<double>> l_cells;
    const auto i50 = threshold_index(0.5);
    const auto i75 = threshold_index(0.75);
    for (const int c : categories) {
        std::vector<std::optional<double>> per_category;
        for (std::size_t ti = 0; ti < p.iou_thresholds.size(); ++ti) {
            const double t = p.iou_thresholds[ti];
            const auto v = cell_ap(cells, c, t, all, p);
            per_category.push_back(v);
            all_cells.push_back(v);
            if (i50 && ti == *i50) {
                at50.push_back(v);
            }
            if (i75 && ti == *i75) {
                at75.push_back(v);
            }
            s_cells.push_back(cell_ap(cells, c, t, small, p));
            m_cells.push_back(cell_ap(cells, c, t, medium, p));
            l_cells.push_back(cell_ap(cells, c, t, large, p));
        }
        result.per_category_ap[c] = mean_defined(per_category);
    }
    result.ap = mean_defined(all_cells);
    result.ap50 = mean_defined(at50);
    result.ap75 = mean_defined(at75);
    result.ap_s = mean_defined(s_cells);
    result.ap_m = mean_defined(m_cells);
    result.ap_l = mean_defined(l_cells);
    return result;
}

void validate(const ChipTypeParams& p) {
    if (p.sparse_max < 0 || !(p.sparse_max < p.common_max)) {
        throw ValidationError("chip_types", "need 0 <= sparse_max < common_max");
    }
}

ChipTypeCounts& ChipTypeCounts::operator+=(const ChipTypeCounts& o) noexcept {
    sparse += o.sparse;
    common += o.common;
    clustered += o.clustered;
    zero += o.zero;
    return *this;
}

ChipTypeCounts count_chip_types(std::span<const ChipPlan> plans, std::span<const Annotation> annotations,
                                const ChipTypeParams& p) {
    validate(p);
    ChipTypeCounts counts;
    for (const auto& chip : plans) {
        long long n = 0;
        for (const auto& a : annotations) {
            if (contains_point_half_open(chip.crop, a.box.center_x(), a.box.center_y())) {
                ++n;
            }
        }
        if (n == 0) {
            ++counts.zero;
        }
        if (n <= p.sparse_max) {
            ++counts.sparse;
        } else if (n <= p.common_max) {
            ++counts.common;
        } else {
            ++counts.clustered;
        }
    }
    return counts;
}

ChipTypeHistogram to_fractions(const ChipTypeCounts& counts) {
    const long long total = counts.total();
    if (total == 0) {
        throw ValidationError("plans", "chip-type histogram needs at least one chip");
    }
    const double n = static_cast<double>(total);
    return {counts.sparse / n, counts.common / n, counts.clustered / n, counts.zero / n};
}

ChipTypeHistogram chip_type_histogram(std::span<const ChipPlan> plans, std::span<const Annotation> annotations,
                                      const ChipTypeParams& p) {
    return to_fractions(count_chip_types(plans, annotations, p));
}

long long count_forwarded(std::span<const std::vector<ChipPlan>> plans_per_image) {
    long long total = 0;
    for (const auto& plans : plans_per_image) {
        total += static_cast<long long>(plans.size());
    }
    return total;
}

std::string format_metric(const std::optional<double>& v) {
    if (!v) {
        return "undef";
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << 100.0 * *v;
    return os.str();
}

std::string format_table(std::span<const std::pair<std::string, EvalResult>> rows) {
    std::size_t name_width = 8;
    for (const auto& [name, r] : rows) {
        name_width = std::max(name_width, name.size());
    }
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_width)) << "strategy" << std::right;
    for (const char* h : {"#img", "AP", "AP50", "AP75", "APs", "APm", "APl"}) {
        os << std::setw(8) << h;
    }
    os << '\n';
    for (const auto& [name, r] : rows) {
        os << std::left << std::setw(static_cast<int>(name_width)) << name << std::right;
        os << std::setw(8) << r.images_forwarded;
        for (const auto& v : {r.ap, r.ap50, r.ap75, r.ap_s, r.ap_m, r.ap_l}) {
            os << std::setw(8) << format_metric(v);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace clustile
