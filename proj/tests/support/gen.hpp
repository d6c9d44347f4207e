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

#include <cstdint>
#include <random>
#include <vector>

#include "clustile/records.hpp"

namespace gen {

/// Test-side randomness, deliberately separate from the library's own Rng.
class Source {
public:
    explicit Source(std::uint64_t seed) : engine_(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
    std::mt19937_64& engine() { return engine_; }

    clustile::Box box(double extent, double min_side, double max_side) {
        const double w = real(min_side, max_side);
        const double h = real(min_side, max_side);
        const double x = real(0.0, extent - w);
        const double y = real(0.0, extent - h);
        return clustile::Box(x, y, x + w, y + h);
    }

    clustile::Box int_box(int extent, int max_side) {
        const int w = integer(1, max_side);
        const int h = integer(1, max_side);
        const int x = integer(0, extent - w);
        const int y = integer(0, extent - h);
        return clustile::Box(x, y, x + w, y + h);
    }

    clustile::Cluster cluster(double extent, double min_side, double max_side) {
        return {box(extent, min_side, max_side), real(0.0, 1.0), integer(0, 20)};
    }

    /// Scores drawn from a handful of levels so that ties actually occur.
    clustile::Cluster tied_cluster(double extent, double min_side, double max_side) {
        return {box(extent, min_side, max_side), integer(0, 4) / 4.0, integer(0, 20)};
    }

    clustile::Detection detection(double extent, double min_side, double max_side, int categories) {
        clustile::Detection d{box(extent, min_side, max_side), integer(1, categories), real(0.0, 1.0), {}, false};
        return d;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gen
