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
#include <vector>

namespace oracle {

struct Rect {
    double x0, y0, x1, y1;
    double w() const { return x1 - x0; }
    double h() const { return y1 - y0; }
};

struct Leaf {
    Rect crop;
    int depth;
    int index;
    bool padded;
    bool clipped;
    bool depth_limited;
};

struct PpSetup {
    double s_hat;
    double input;
    double lo;
    double hi;
    int max_depth;
    double image_w;
    double image_h;
};

/// Independent recursive statement of partition-and-padding.
inline void pp_recurse(const Rect& r, int depth, int index, const PpSetup& s, std::vector<Leaf>& out) {
    const double proj = s.s_hat * s.input / std::min(r.w(), r.h());
    if (proj > s.hi) {
        const double g = proj / s.hi;
        const double cx = (r.x0 + r.x1) / 2;
        const double cy = (r.y0 + r.y1) / 2;
        const Rect wanted{cx - r.w() * g / 2, cy - r.h() * g / 2, cx + r.w() * g / 2, cy + r.h() * g / 2};
        const Rect crop{std::max(0.0, wanted.x0), std::max(0.0, wanted.y0), std::min(s.image_w, wanted.x1),
                        std::min(s.image_h, wanted.y1)};
        const bool clipped = crop.x0 != wanted.x0 || crop.y0 != wanted.y0 || crop.x1 != wanted.x1 ||
                             crop.y1 != wanted.y1;
        out.push_back({crop, depth, index, true, clipped, false});
        return;
    }
    if (proj < s.lo && depth < s.max_depth) {
        if (r.w() >= r.h()) {
            const double mid = (r.x0 + r.x1) / 2;
            pp_recurse({r.x0, r.y0, mid, r.y1}, depth + 1, 2 * index + 1, s, out);
            pp_recurse({mid, r.y0, r.x1, r.y1}, depth + 1, 2 * index + 2, s, out);
        } else {
            const double mid = (r.y0 + r.y1) / 2;
            pp_recurse({r.x0, r.y0, r.x1, mid}, depth + 1, 2 * index + 1, s, out);
            pp_recurse({r.x0, mid, r.x1, r.y1}, depth + 1, 2 * index + 2, s, out);
        }
        return;
    }
    out.push_back({r, depth, index, false, false, proj < s.lo});
}

inline std::vector<Leaf> pp_leaves(const Rect& cluster, const PpSetup& s) {
    std::vector<Leaf> out;
    pp_recurse(cluster, 0, 0, s, out);
    return out;
}

}  // namespace oracle
