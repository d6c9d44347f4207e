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

#include "clustile/records.hpp"

#include <algorithm>

namespace clustile {

void validate(const Annotation& a) {
    if (a.category_id < 1) {
        throw ValidationError("category_id", "must be >= 1, got " + std::to_string(a.category_id));
    }
}

void validate(const Detection& d) {
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw ValidationError("score", "must lie in [0, 1], got " + std::to_string(d.score));
    }
    if (d.category_id < 1) {
        throw ValidationError("category_id", "must be >= 1, got " + std::to_string(d.category_id));
    }
    if (d.in_padded_region && !d.source.is_chip()) {
        throw ValidationError("in_padded_region", "only chip detections can lie in a padded region");
    }
}

void validate(const ImageRecord& r) {
    const Box frame = r.extent.as_box();
    for (const auto& a : r.annotations) {
        validate(a);
        if (!contains(frame, a.box)) {
            throw ValidationError("annotations.bbox",
                                  "object " + std::to_string(a.object_id) + " extends outside the image");
        }
    }
}

void validate(const Cluster& c) {
    if (!(c.score >= 0.0 && c.score <= 1.0)) {
        throw ValidationError("score", "cluster score must lie in [0, 1], got " + std::to_string(c.score));
    }
    if (c.member_count < 0) {
        throw ValidationError("member_count", "must be non-negative");
    }
}

bool detection_rank_less(const Detection& a, const Detection& b) noexcept {
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
    return a.category_id < b.category_id;
}

void sort_by_rank(std::vector<Detection>& dets) { std::stable_sort(dets.begin(), dets.end(), detection_rank_less); }

}  // namespace clustile
