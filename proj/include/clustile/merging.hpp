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
#include <stdexcept>
#include <vector>

#include "clustile/records.hpp"

namespace clustile {

enum class OverlapMeasure { iou, intersection_over_min };

struct MergeParams {
    double tau_op = 0.7;
    int n_max = 3;
    int max_icm_rounds = 16;
    OverlapMeasure overlap = OverlapMeasure::iou;
};

class MergeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate(const MergeParams& p);

double overlap(const Box& a, const Box& b, OverlapMeasure measure) noexcept;

/// Non-max merging. Repeatedly takes the best-ranked cluster left in the pool as a
/// seed, absorbs every pooled cluster whose overlap with the seed's box exceeds
/// `tau_op`, and emits the enclosing rectangle (max score, summed member_count).
/// The grown rectangle is not compared against clusters again within the same call.
std::vector<Cluster> nmm(std::span<const Cluster> clusters, double tau_op,
                         OverlapMeasure measure = OverlapMeasure::iou);

/// Iterative cluster merging: runs nmm until at most n_max clusters remain or a
/// round changes nothing, then keeps the n_max best. Throws MergeError if the
/// round budget runs out.
std::vector<Cluster> icm(std::span<const Cluster> clusters, const MergeParams& p);

}  // namespace clustile
