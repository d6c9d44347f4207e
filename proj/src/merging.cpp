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

#include "clustile/merging.hpp"

#include <algorithm>
#include <string>

#include "clustile/clustering.hpp"

namespace clustile {

void validate(const MergeParams& p) {
    if (!(p.tau_op > 0.0 && p.tau_op < 1.0)) {
        throw ValidationError("tau_op", "must lie in (0, 1)");
    }
    if (p.n_max < 1) {
        throw ValidationError("n_max", "must be >= 1");
    }
    if (p.max_icm_rounds < 1) {
        throw ValidationError("max_icm_rounds", "must be >= 1");
    }
}

double overlap(const Box& a, const Box& b, OverlapMeasure measure) noexcept {
    return measure == OverlapMeasure::iou ? iou(a, b) : intersection_over_min(a, b);
}

std::vector<Cluster> nmm(std::span<const Cluster> clusters, double tau_op, OverlapMeasure measure) {
    std::vector<Cluster> pool(clusters.begin(), clusters.end());
    sort_by_rank(pool);

    std::vector<Cluster> merged;
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t seed = 0; seed < pool.size(); ++seed) {
        if (taken[seed]) {
            continue;
        }
        taken[seed] = true;
        Cluster out = pool[seed];
        for (std::size_t j = seed + 1; j < pool.size(); ++j) {
            if (taken[j] || overlap(pool[seed].box, pool[j].box, measure) <= tau_op) {
                continue;
            }
            taken[j] = true;
            out.box = enclosing(out.box, pool[j].box);
            out.score = std::max(out.score, pool[j].score);
            out.member_count += pool[j].member_count;
        }
        merged.push_back(out);
    }
    sort_by_rank(merged);
    return merged;
}

std::vector<Cluster> icm(std::span<const Cluster> clusters, const MergeParams& p) {
    validate(p);
    std::vector<Cluster> current(clusters.begin(), clusters.end());
    std::vector<Cluster> result = current;
    const auto n_max = static_cast<std::size_t>(p.n_max);

    int rounds = 0;
    while (result.size() > n_max) {
        if (rounds == p.max_icm_rounds) {
            throw MergeError("icm did not settle within " + std::to_string(p.max_icm_rounds) + " rounds");
        }
        ++rounds;
        result = nmm(current, p.tau_op, p.overlap);
        if (result.size() == current.size()) {
            break;
        }
        current = result;
    }

    sort_by_rank(result);
    if (result.size() > n_max) {
        result.erase(result.begin() + static_cast<std::ptrdiff_t>(n_max), result.end());
    }
    return result;
}

}  // namespace clustile
