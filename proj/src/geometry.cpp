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

#include "clustile/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace clustile {

Box::Box(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
    if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) || !std::isfinite(y_max)) {
        throw GeometryError("box coordinates must be finite");
    }
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw GeometryError("degenerate box (" + std::to_string(x_min) + ", " + std::to_string(y_min) + ", " +
                            std::to_string(x_max) + ", " + std::to_string(y_max) + ")");
    }
}

double Box::short_side() const noexcept { return std::min(width(), height()); }
double Box::long_side() const noexcept { return std::max(width(), height()); }

bool lex_less(const Box& a, const Box& b) noexcept {
    return std::make_tuple(a.x_min(), a.y_min(), a.x_max(), a.y_max()) <
           std::make_tuple(b.x_min(), b.y_min(), b.x_max(), b.y_max());
}

ImageExtent::ImageExtent(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) {
        throw GeometryError("image extent must be at least 1x1");
    }
}

Transform::Transform(double ox, double oy, double s) : offset_x(ox), offset_y(oy), scale(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw GeometryError("transform scale must be positive");
    }
}

double area(const Box& b) noexcept { return b.width() * b.height(); }

double intersection_area(const Box& a, const Box& b) noexcept {
    const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
    const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
    if (w <= 0.0 || h <= 0.0) {
        return 0.0;
    }
    return w * h;
}

double iou(const Box& a, const Box& b) noexcept {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) {
        return 0.0;
    }
    if (a == b) {
        return 1.0;
    }
    return inter / (area(a) + area(b) - inter);
}

double intersection_over_min(const Box& a, const Box& b) noexcept {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) {
        return 0.0;
    }
    return inter / std::min(area(a), area(b));
}

Box enclosing(const Box& a, const Box& b) {
    return Box(std::min(a.x_min(), b.x_min()), std::min(a.y_min(), b.y_min()), std::max(a.x_max(), b.x_max()),
               std::max(a.y_max(), b.y_max()));
}

bool contains(const Box& outer, const Box& inner) noexcept {
    return outer.x_min() <= inner.x_min() && outer.y_min() <= inner.y_min() && inner.x_max() <= outer.x_max() &&
           inner.y_max() <= outer.y_max();
}

bool contains_point(const Box& b, double x, double y) noexcept {
    return b.x_min() <= x && x <= b.x_max() && b.y_min() <= y && y <= b.y_max();
}

bool contains_point_strict(const Box& b, double x, double y) noexcept {
    return b.x_min() < x && x < b.x_max() && b.y_min() < y && y < b.y_max();
}

bool contains_point_half_open(const Box& b, double x, double y) noexcept {
    return b.x_min() <= x && x < b.x_max() && b.y_min() <= y && y < b.y_max();
}

bool center_inside(const Box& region, const Box& b) noexcept {
    return contains_point_strict(region, b.center_x(), b.center_y());
}

double boundary_gap(const Box& a, const Box& b) noexcept {
    const double dx = std::max({0.0, b.x_min() - a.x_max(), a.x_min() - b.x_max()});
    const double dy = std::max({0.0, b.y_min() - a.y_max(), a.y_min() - b.y_max()});
    return std::max(dx, dy);
}

std::optional<Box> intersection(const Box& a, const Box& b) {
    const double x0 = std::max(a.x_min(), b.x_min());
    const double y0 = std::max(a.y_min(), b.y_min());
    const double x1 = std::min(a.x_max(), b.x_max());
    const double y1 = std::min(a.y_max(), b.y_max());
    if (!(x0 < x1) || !(y0 < y1)) {
        return std::nullopt;
    }
    return Box(x0, y0, x1, y1);
}

std::optional<Box> clip(const Box& b, const ImageExtent& e) { return intersection(b, e.as_box()); }

Box expand(const Box& b, double margin) {
    return Box(b.x_min() - margin, b.y_min() - margin, b.x_max() + margin, b.y_max() + margin);
}

Box to_global(const Box& b, const Transform& t) {
    return Box(b.x_min() * t.scale + t.offset_x, b.y_min() * t.scale + t.offset_y, b.x_max() * t.scale + t.offset_x,
               b.y_max() * t.scale + t.offset_y);
}

Box to_local(const Box& b, const Transform& t) {
    return Box((b.x_min() - t.offset_x) / t.scale, (b.y_min() - t.offset_y) / t.scale,
               (b.x_max() - t.offset_x) / t.scale, (b.y_max() - t.offset_y) / t.scale);
}

}  // namespace clustile
