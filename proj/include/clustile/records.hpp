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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clustile/geometry.hpp"

namespace clustile {

/// Raised when a record breaks one of its invariants. `field` names the offending member.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

using ImageId = std::int64_t;
using ObjectId = std::int64_t;
using ChipId = std::int32_t;

struct Annotation {
    Box box;
    int category_id = 1;
    ObjectId object_id = 0;

    bool operator==(const Annotation&) const = default;
};

struct DetectionSource {
    enum class Kind { global, chip };

    Kind kind = Kind::global;
    ChipId chip_id = 0;

    static DetectionSource global() { return {}; }
    static DetectionSource chip(ChipId id) { return {Kind::chip, id}; }

    bool is_chip() const noexcept { return kind == Kind::chip; }
    bool operator==(const DetectionSource&) const = default;
};

struct Detection {
    Box box;
    int category_id = 1;
    double score = 0.0;
    DetectionSource source;
    bool in_padded_region = false;

    bool operator==(const Detection&) const = default;
};

struct ImageRecord {
    ImageId image_id = 0;
    ImageExtent extent{1, 1};
    std::vector<Annotation> annotations;

    bool operator==(const ImageRecord&) const = default;
};

/// Candidate region expected to hold at least three objects. member_count is 0
/// when unknown.
struct Cluster {
    Box box;
    double score = 0.0;
    int member_count = 0;

    bool operator==(const Cluster&) const = default;
};

/// Detections of one image, in whatever frame the producing stage uses.
struct ImageDetections {
    ImageId image_id = 0;
    std::vector<Detection> detections;

    bool operator==(const ImageDetections&) const = default;
};

void validate(const Annotation& a);
void validate(const Detection& d);
void validate(const ImageRecord& r);
void validate(const Cluster& c);

/// Descending score, then larger area, then lexicographic box. Strict weak order.
bool detection_rank_less(const Detection& a, const Detection& b) noexcept;
void sort_by_rank(std::vector<Detection>& dets);

}  // namespace clustile
