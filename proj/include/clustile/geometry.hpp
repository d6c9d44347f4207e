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

#include <optional>
#include <stdexcept>

namespace clustile {

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Axis-aligned rectangle in corner form. Coordinates are continuous pixels;
/// whether the frame is global or chip-local is up to the caller.
///
/// Zero-area or non-finite boxes cannot be constructed.
class Box {
public:
    Box(double x_min, double y_min, double x_max, double y_max);

    static Box from_xywh(double x, double y, double w, double h) { return Box(x, y, x + w, y + h); }

    double x_min() const noexcept { return x_min_; }
    double y_min() const noexcept { return y_min_; }
    double x_max() const noexcept { return x_max_; }
    double y_max() const noexcept { return y_max_; }

    double width() const noexcept { return x_max_ - x_min_; }
    double height() const noexcept { return y_max_ - y_min_; }
    double short_side() const noexcept;
    double long_side() const noexcept;
    double center_x() const noexcept { return 0.5 * (x_min_ + x_max_); }
    double center_y() const noexcept { return 0.5 * (y_min_ + y_max_); }

    bool operator==(const Box&) const = default;

private:
    double x_min_;
    double y_min_;
    double x_max_;
    double y_max_;
};

/// Lexicographic (x_min, y_min, x_max, y_max) ordering, used for tie-breaks.
bool lex_less(const Box& a, const Box& b) noexcept;

struct ImageExtent {
    ImageExtent(int width, int height);

    int width;
    int height;

    Box as_box() const { return Box(0.0, 0.0, width, height); }
    bool operator==(const ImageExtent&) const = default;
};

/// Maps chip-local coordinates to the global frame: global = local * scale + offset.
struct Transform {
    Transform(double offset_x, double offset_y, double scale);

    double offset_x;
    double offset_y;
    double scale;
};

double area(const Box& b) noexcept;
double intersection_area(const Box& a, const Box& b) noexcept;
double iou(const Box& a, const Box& b) noexcept;
/// Intersection over the smaller of the two areas.
double intersection_over_min(const Box& a, const Box& b) noexcept;

Box enclosing(const Box& a, const Box& b);
/// True when `inner` lies within `outer` (boundaries may touch).
bool contains(const Box& outer, const Box& inner) noexcept;
bool contains_point(const Box& b, double x, double y) noexcept;
/// Open-interior test; points on the boundary are outside.
bool contains_point_strict(const Box& b, double x, double y) noexcept;
/// Half-open [min, max) test, so a point belongs to exactly one tile of a grid.
bool contains_point_half_open(const Box& b, double x, double y) noexcept;
bool center_inside(const Box& region, const Box& b) noexcept;

/// Chebyshev distance between box boundaries; 0 when the boxes touch or overlap.
double boundary_gap(const Box& a, const Box& b) noexcept;

std::optional<Box> intersection(const Box& a, const Box& b);
std::optional<Box> clip(const Box& b, const ImageExtent& e);
Box expand(const Box& b, double margin);

Box to_global(const Box& b, const Transform& t);
Box to_local(const Box& b, const Transform& t);

}  // namespace clustile
