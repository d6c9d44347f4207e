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

#include "clustile/clustering.hpp"

#include <algorithm>
#include <numeric>

namespace clustile {

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        // smaller root wins so the representative does not depend on call order
        if (b < a) {
            std::swap(a, b);
        }
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

struct Group {
    Box box;
    std::vector<std::size_t> members;
};

std::vector<Group> grouped_boxes(std::span<const Box> boxes, double merge_gap, int min_members, double margin,
                                 const ImageExtent& extent) {
    std::vector<Group> groups;
    for (auto& component : link_components(boxes, merge_gap)) {
        if (component.size() < static_cast<std::size_t>(min_members)) {
            continue;
        }
        Box enclosure = boxes[component.front()];
        for (const auto i : component) {
            enclosure = enclosing(enclosure, boxes[i]);
        }
        const auto clipped = clip(expand(enclosure, margin), extent);
        if (!clipped) {
            continue;
        }
        groups.push_back({*clipped, std::move(component)});
    }
    return groups;
}

}  // namespace

void validate(const ClusterGenParams& p) {
    if (!(p.merge_gap >= 0.0)) {
        throw ValidationError("merge_gap", "must be >= 0");
    }
    if (p.min_members < 1) {
        throw ValidationError("min_members", "must be >= 1");
    }
    if (!(p.margin >= 0.0)) {
        throw ValidationError("margin", "must be >= 0");
    }
}

void validate(const ProposalParams& p) {
    validate(ClusterGenParams{p.merge_gap, p.min_members, p.margin});
}

std::vector<std::vector<std::size_t>> link_components(std::span<const Box> boxes, double merge_gap) {
    const std::size_t n = boxes.size();
    // Sweep on x so that only pairs whose x-intervals come within merge_gap are tested.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (boxes[a].x_min() != boxes[b].x_min()) {
            return boxes[a].x_min() < boxes[b].x_min();
        }
        return a < b;
    });

    DisjointSet sets(n);
    for (std::size_t oi = 0; oi < n; ++oi) {
        const Box& a = boxes[order[oi]];
        for (std::size_t oj = oi + 1; oj < n; ++oj) {
            const Box& b = boxes[order[oj]];
            if (b.x_min() - a.x_max() > merge_gap) {
                break;
            }
            if (boundary_gap(a, b) <= merge_gap) {
                sets.unite(order[oi], order[oj]);
            }
        }
    }

    std::vector<std::vector<std::size_t>> components;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = sets.find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::ptrdiff_t>(components.size());
            components.emplace_back();
        }
        components[static_cast<std::size_t>(slot[root])].push_back(i);
    }
    return components;
}

std::vector<Cluster> generate_gt_clusters(std::span<const Annotation> annotations, const ClusterGenParams& p,
                                          const ImageExtent& extent) {
    validate(p);
    std::vector<Box> boxes;
    boxes.reserve(annotations.size());
    for (const auto& a : annotations) {
        boxes.push_back(a.box);
    }

    std::vector<Cluster> clusters;
    for (const auto& g : grouped_boxes(boxes, p.merge_gap, p.min_members, p.margin, extent)) {
        clusters.push_back({g.box, 1.0, static_cast<int>(g.members.size())});
    }
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.member_count != b.member_count) {
            return a.member_count > b.member_count;
        }
        return cluster_rank_less(a, b);
    });
    return clusters;
}

std::vector<Cluster> propose_clusters(std::span<const Detection> detections, const ProposalParams& p,
                                      const ImageExtent& extent) {
    validate(p);
    std::vector<Box> boxes;
    boxes.reserve(detections.size());
    for (const auto& d : detections) {
        boxes.push_back(d.box);
    }

    std::vector<Cluster> clusters;
    for (const auto& g : grouped_boxes(boxes, p.merge_gap, p.min_members, p.margin, extent)) {
        const int count = static_cast<int>(g.members.size());
        double score = 0.0;
        switch (p.score_mode) {
            case ProposalScoreMode::mean_member_score: {
                // summed in sorted order so input permutation cannot change the rounding
                std::vector<double> scores;
                scores.reserve(g.members.size());
                for (const auto i : g.members) {
                    scores.push_back(detections[i].score);
                }
                std::sort(scores.begin(), scores.end());
                score = std::clamp(std::accumulate(scores.begin(), scores.end(), 0.0) / count, 0.0, 1.0);
                break;
            }
            case ProposalScoreMode::count_normalized:
                score = std::min(1.0, count / 10.0);
                break;
        }
        clusters.push_back({g.box, score, count});
    }
    sort_by_rank(clusters);
    return clusters;
}

bool cluster_rank_less(const Cluster& a, const Cluster& b) noexcept {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    const double area_a = area(a.box);
    const double area_b = area(b.box);
    if (area_a != area_b) {
        return area_a > area_b;
    }
    if (a.box != b.box) {
        return lex_less(a.box, b.box);
    }
    return a.member_count > b.member_count;
}

void sort_by_rank(std::vector<Cluster>& clusters) {
    std::stable_sort(clusters.begin(), clusters.end(), cluster_rank_less);
}

}  // namespace clustile
