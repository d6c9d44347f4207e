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

#include <cmath>
#include <vector>

#include "clustile/records.hpp"
#include "support/gen.hpp"

namespace gen {

using namespace clustile;

struct Toy {
    std::vector<ImageRecord> images;
    std::vector<ImageDetections> dets;
};

// Small instance whose detections are mostly jittered copies of ground truth,
// so every IoU threshold sees a mix of hits and misses.
inline Toy toy_instance(Source& src, int max_dets = 10, int max_gt = 8) {
    Toy t;
    const int n_images = src.integer(1, 2);
    int dets_left = src.integer(0, max_dets);
    int gts_left = src.integer(0, max_gt);
    for (int im = 1; im <= n_images; ++im) {
        ImageRecord r;
        r.image_id = im;
        r.extent = ImageExtent(600, 600);
        ImageDetections d{im, {}};
        const int n_gt = im == n_images ? gts_left : src.integer(0, gts_left);
        gts_left -= n_gt;
        for (int i = 0; i < n_gt; ++i) {
            const double side = std::exp(src.real(std::log(8.0), std::log(200.0)));
            const double x = src.real(0, 600 - side), y = src.real(0, 600 - side * 0.8);
            r.annotations.push_back({Box(x, y, x + side, y + side * 0.8), src.integer(1, 2), i + 1});
        }
        const int n_det = im == n_images ? dets_left : src.integer(0, dets_left);
        dets_left -= n_det;
        for (int i = 0; i < n_det; ++i) {
            Detection det{Box(0, 0, 1, 1), src.integer(1, 2), src.coin(0.3) ? 0.5 : src.real(0, 1), {}, false};
            if (!r.annotations.empty() && src.coin(0.75)) {
                const auto& a = r.annotations[std::size_t(src.integer(0, int(r.annotations.size()) - 1))];
                const double j = src.real(0, 0.3) * a.box.short_side();
                det.box = Box(a.box.x_min() + src.real(-j, j), a.box.y_min() + src.real(-j, j),
                              a.box.x_max() + src.real(-j, j), a.box.y_max() + src.real(-j, j));
                if (src.coin(0.8)) det.category_id = a.category_id;
            } else {
                det.box = src.box(600, 5, 150);
            }
            d.detections.push_back(det);
        }
        t.images.push_back(r);
        t.dets.push_back(d);
    }
    return t;
}

}  // namespace gen
