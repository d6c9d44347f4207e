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
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "clustile/geometry.hpp"

namespace oracle {

/// Separation of two boxes: the larger of the x and y gaps, 0 when they touch.
inline double gap(const clustile::Box& a, const clustile::Box& b) {
    double dx = 0.0;
    if (a.x_max() < b.x_min()) dx = b.x_min() - a.x_max();
    if (b.x_max() < a.x_min()) dx = a.x_min() - b.x_max();
    double dy = 0.0;
    if (a.y_max() < b.y_min()) dy = b.y_min() - a.y_max();
    if (b.y_max() < a.y_min()) dy = a.y_min() - b.y_max();
    return dx > dy ? dx : dy;
}

/// Connected components of the pairwise gap graph, by an O(n^2) union-find.
inline std::set<std::set<std::size_t>> components(const std::vector<clustile::Box>& boxes, double merge_gap) {
    std::vector<std::size_t> parent(boxes.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i];
        return i;
    };
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            if (gap(boxes[i], boxes[j]) <= merge_gap) {
                parent[find(i)] = find(j);
            }
        }
    }
    std::map<std::size_t, std::set<std::size_t>> groups;
    for (std::size_t i = 0; i < boxes.size(); ++i) groups[find(i)].insert(i);
    std::set<std::set<std::size_t>> out;
    for (auto& [root, members] : groups) out.insert(members);
    return out;
}

}  // namespace oracle
