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
#include <vector>

#include "clustile/geometry.hpp"
#include "clustile/records.hpp"

namespace clustile {

// Defaults for merge_gap and margin are placeholders; nothing in the method
// pins them down.
struct ClusterGenParams {
    double merge_gap = 32.0;
    int min_members = 3;
    double margin = 8.0;
};

enum class ProposalScoreMode { mean_member_score, count_normalized };

struct ProposalParams {
    double merge_gap = 32.0;
    int min_members = 3;
    double margin = 8.0;
    ProposalScoreMode score_mode = ProposalScoreMode::count_normalized;
};

void validate(const ClusterGenParams& p);
void validate(const ProposalParams& p);

/// Single-linkage grouping: boxes i and j are linked when their boundary gap is
/// at most `merge_gap`. Returns connected components as sorted index lists,
/// ordered by their smallest index.
std::vector<std::vector<std::size_t>> link_components(std::span<const Box> boxes, double merge_gap);

/// Ground-truth clusters: components with at least min_members objects, enclosed,
/// expanded by margin and clipped. Sorted by member_count descending.
std::vector<Cluster> generate_gt_clusters(std::span<const Annotation> annotations, const ClusterGenParams& p,
                                          const ImageExtent& extent);

/// Cluster proposals grouped from detections in the global frame. Sorted by score descending.
std::vector<Cluster> propose_clusters(std::span<const Detection> detections, const ProposalParams& p,
                                      const ImageExtent& extent);

/// Score descending, then larger area, then lexicographic box.
bool cluster_rank_less(const Cluster& a, const Cluster& b) noexcept;
void sort_by_rank(std::vector<Cluster>& clusters);

}  // namespace clustile
