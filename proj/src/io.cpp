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

#include "clustile/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace clustile {

using nlohmann::json;

ParseError::ParseError(const std::string& source, int line, int column, const std::string& detail)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + detail),
      line_(line),
      column_(column) {}

double round6(double v) noexcept { return std::round(v * 1e6) / 1e6; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << content;
        if (!out.flush()) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

namespace {

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        int column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError(source, line, column, e.what());
    }
}

bool blank(const std::string& text) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

const json& require(const json& obj, const char* key, const std::string& context) {
    if (!obj.is_object()) {
        throw ValidationError(context, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ValidationError(context + "." + key, "missing");
    }
    return *it;
}

template <typename T>
T require_as(const json& obj, const char* key, const std::string& context) {
    const json& v = require(obj, key, context);
    try {
        if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ValidationError(context + "." + key, "expected a number");
            }
        } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v.is_number_integer()) {
                throw ValidationError(context + "." + key, "expected an integer");
            }
        }
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(context + "." + key, e.what());
    }
}

Box box_from_xywh(const json& bbox, const std::string& field) {
    if (!bbox.is_array() || bbox.size() != 4 ||
        !std::all_of(bbox.begin(), bbox.end(), [](const json& v) { return v.is_number(); })) {
        throw ValidationError(field, "expected [x, y, width, height]");
    }
    const double x = bbox[0].get<double>();
    const double y = bbox[1].get<double>();
    const double w = bbox[2].get<double>();
    const double h = bbox[3].get<double>();
    if (!(w > 0.0) || !(h > 0.0)) {
        throw ValidationError(field, "width and height must be positive");
    }
    try {
        return Box(round6(x), round6(y), round6(x + w), round6(y + h));
    } catch (const GeometryError& e) {
        throw ValidationError(field, e.what());
    }
}

json xywh(const Box& b) {
    return json::array({round6(b.x_min()), round6(b.y_min()), round6(b.x_max() - b.x_min()),
                        round6(b.y_max() - b.y_min())});
}

// Plans keep full double precision so partitions still tile exactly after a round trip.
json corners(const Box& b) { return json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()}); }

Box box_from_corners(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 4 ||
        !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
        throw ValidationError(field, "expected [x_min, y_min, x_max, y_max]");
    }
    try {
        return Box(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>());
    } catch (const GeometryError& e) {
        throw ValidationError(field, e.what());
    }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<ImageRecord> parse_dataset(const std::string& text, const std::string& source) {
    if (blank(text)) {
        return {};
    }
    const json doc = parse_json(text, source);
    if (!doc.is_object()) {
        throw ValidationError("dataset", "expected a JSON object");
    }
    std::map<ImageId, ImageRecord> images;
    if (doc.contains("images")) {
        for (const auto& img : doc["images"]) {
            const auto id = require_as<ImageId>(img, "id", "images[]");
            try {
                ImageRecord r;
                r.image_id = id;
                r.extent = ImageExtent(require_as<int>(img, "width", "images[]"),
                                       require_as<int>(img, "height", "images[]"));
                if (!images.emplace(id, r).second) {
                    throw ValidationError("images[].id", "duplicate image id " + std::to_string(id));
                }
            } catch (const GeometryError& e) {
                throw ValidationError("images[].width", e.what());
            }
        }
    }
    if (doc.contains("annotations")) {
        for (const auto& a : doc["annotations"]) {
            const auto image_id = require_as<ImageId>(a, "image_id", "annotations[]");
            const auto it = images.find(image_id);
            if (it == images.end()) {
                throw ValidationError("annotations[].image_id", "unknown image " + std::to_string(image_id));
            }
            Annotation ann{box_from_xywh(require(a, "bbox", "annotations[]"), "annotations[].bbox"),
                           require_as<int>(a, "category_id", "annotations[]"),
                           a.contains("object_id") ? require_as<ObjectId>(a, "object_id", "annotations[]")
                                                   : require_as<ObjectId>(a, "id", "annotations[]")};
            validate(ann);
            it->second.annotations.push_back(ann);
        }
    }
    std::vector<ImageRecord> out;
    out.reserve(images.size());
    for (auto& [id, r] : images) {
        std::sort(r.annotations.begin(), r.annotations.end(),
                  [](const Annotation& a, const Annotation& b) { return a.object_id < b.object_id; });
        for (std::size_t i = 1; i < r.annotations.size(); ++i) {
            if (r.annotations[i].object_id == r.annotations[i - 1].object_id) {
                throw ValidationError("annotations[].object_id", "duplicate object id in image " + std::to_string(id));
            }
        }
        validate(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::string dump_dataset(const std::vector<ImageRecord>& input) {
    std::vector<ImageRecord> images = input;
    std::sort(images.begin(), images.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
    json doc;
    doc["images"] = json::array();
    doc["annotations"] = json::array();
    std::set<int> categories;
    long long next_id = 1;
    for (auto& r : images) {
        doc["images"].push_back({{"id", r.image_id}, {"width", r.extent.width}, {"height", r.extent.height}});
        std::sort(r.annotations.begin(), r.annotations.end(),
                  [](const Annotation& a, const Annotation& b) { return a.object_id < b.object_id; });
        for (const auto& a : r.annotations) {
            const json bbox = xywh(a.box);
            doc["annotations"].push_back({{"id", next_id++},
                                          {"image_id", r.image_id},
                                          {"object_id", a.object_id},
                                          {"category_id", a.category_id},
                                          {"bbox", bbox},
                                          {"area", round6(bbox[2].get<double>() * bbox[3].get<double>())},
                                          {"iscrowd", 0}});
            categories.insert(a.category_id);
        }
    }
    doc["categories"] = json::array();
    for (const int c : categories) {
        doc["categories"].push_back({{"id", c}, {"name", "category_" + std::to_string(c)}});
    }
    return doc.dump(1) + "\n";
}

std::vector<ImageRecord> load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path), path.string());
}

void save_dataset(const std::vector<ImageRecord>& images, const std::filesystem::path& path) {
    write_file_atomic(path, dump_dataset(images));
}

std::vector<ImageDetections> parse_detections(const std::string& text, const std::string& source) {
    if (blank(text)) {
        return {};
    }
    const json doc = parse_json(text, source);
    if (!doc.is_array()) {
        throw ValidationError("detections", "expected a JSON array");
    }
    std::map<ImageId, std::vector<Detection>> grouped;
    for (const auto& d : doc) {
        Detection det{box_from_xywh(require(d, "bbox", "detections[]"), "detections[].bbox"),
                      require_as<int>(d, "category_id", "detections[]"), require_as<double>(d, "score", "detections[]"),
                      DetectionSource::global(), false};
        if (d.contains("source")) {
            const auto src = require_as<std::string>(d, "source", "detections[]");
            if (src == "chip") {
                det.source = DetectionSource::chip(require_as<ChipId>(d, "chip_id", "detections[]"));
            } else if (src != "global") {
                throw ValidationError("detections[].source", "expected \"global\" or \"chip\", got \"" + src + "\"");
            }
        }
        if (d.contains("in_padded_region")) {
            det.in_padded_region = require_as<bool>(d, "in_padded_region", "detections[]");
        }
        try {
            validate(det);
        } catch (const ValidationError& e) {
            throw ValidationError("detections[]." + e.field(), e.what());
        }
        grouped[require_as<ImageId>(d, "image_id", "detections[]")].push_back(det);
    }
    std::vector<ImageDetections> out;
    for (auto& [id, dets] : grouped) {
        sort_by_rank(dets);
        out.push_back({id, std::move(dets)});
    }
    return out;
}

std::string dump_detections(const std::vector<ImageDetections>& input) {
    std::vector<ImageDetections> groups = input;
    std::stable_sort(groups.begin(), groups.end(),
                     [](const ImageDetections& a, const ImageDetections& b) { return a.image_id < b.image_id; });
    json doc = json::array();
    for (auto& g : groups) {
        sort_by_rank(g.detections);
        for (const auto& d : g.detections) {
            json entry = {{"image_id", g.image_id},
                          {"category_id", d.category_id},
                          {"bbox", xywh(d.box)},
                          {"score", d.score},
                          {"source", d.source.is_chip() ? "chip" : "global"}};
            if (d.source.is_chip()) {
                entry["chip_id"] = d.source.chip_id;
                entry["in_padded_region"] = d.in_padded_region;
            }
            doc.push_back(std::move(entry));
        }
    }
    return doc.dump(1) + "\n";
}

std::vector<ImageDetections> load_detections(const std::filesystem::path& path) {
    return parse_detections(read_file(path), path.string());
}

void save_detections(const std::vector<ImageDetections>& dets, const std::filesystem::path& path) {
    write_file_atomic(path, dump_detections(dets));
}

namespace {

json provenance_json(const Provenance& p) {
    switch (p.kind) {
        case Provenance::Kind::global_pass:
            return {{"kind", "global_pass"}};
        case Provenance::Kind::cluster:
            return {{"kind", "cluster"}, {"cluster_id", p.cluster_id}, {"partition_index", p.partition_index}};
        case Provenance::Kind::grid:
            return {{"kind", "grid"}, {"row", p.row}, {"col", p.col}};
    }
    return {};
}

Provenance parse_provenance(const json& v) {
    const auto kind = require_as<std::string>(v, "kind", "chips[].provenance");
    if (kind == "global_pass") {
        return Provenance::global_pass();
    }
    if (kind == "cluster") {
        return Provenance::cluster(require_as<int>(v, "cluster_id", "chips[].provenance"),
                                   require_as<int>(v, "partition_index", "chips[].provenance"));
    }
    if (kind == "grid") {
        return Provenance::grid(require_as<int>(v, "row", "chips[].provenance"),
                                require_as<int>(v, "col", "chips[].provenance"));
    }
    throw ValidationError("chips[].provenance.kind", "unknown provenance \"" + kind + "\"");
}

}  // namespace

std::string dump_plans(const PlanFile& plans) {
    json doc;
    doc["strategy"] = plans.strategy;
    doc["images"] = json::array();
    for (const auto& img : plans.images) {
        json entry = {{"image_id", img.image_id}, {"width", img.extent.width}, {"height", img.extent.height}};
        entry["clusters"] = json::array();
        for (const auto& c : img.clusters) {
            entry["clusters"].push_back({{"box", corners(c.box)}, {"score", c.score}, {"member_count", c.member_count}});
        }
        entry["chips"] = json::array();
        for (const auto& chip : img.chips) {
            json padded = nullptr;
            if (chip.padded_region) {
                padded = {{"outer", corners(chip.padded_region->outer)}, {"inner", corners(chip.padded_region->inner)}};
            }
            entry["chips"].push_back({{"chip_id", chip.chip_id},
                                      {"crop", corners(chip.crop)},
                                      {"resize_factor", chip.resize_factor},
                                      {"padded_region", padded},
                                      {"provenance", provenance_json(chip.provenance)},
                                      {"projected_object_scale", optional_number(chip.projected_object_scale)},
                                      {"depth", chip.depth},
                                      {"depth_limited", chip.depth_limited},
                                      {"clipped", chip.clipped}});
        }
        entry["warnings"] = json::array();
        for (const auto& w : img.warnings) {
            entry["warnings"].push_back({{"cluster_id", w.cluster_id}, {"message", w.message}});
        }
        doc["images"].push_back(std::move(entry));
    }
    return doc.dump(1) + "\n";
}

PlanFile parse_plans(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    PlanFile plans;
    plans.strategy = require_as<std::string>(doc, "strategy", "plans");
    for (const auto& img : require(doc, "images", "plans")) {
        ImagePlan ip;
        ip.image_id = require_as<ImageId>(img, "image_id", "images[]");
        try {
            ip.extent = ImageExtent(require_as<int>(img, "width", "images[]"), require_as<int>(img, "height", "images[]"));
        } catch (const GeometryError& e) {
            throw ValidationError("images[].width", e.what());
        }
        for (const auto& c : require(img, "clusters", "images[]")) {
            Cluster cluster{box_from_corners(require(c, "box", "clusters[]"), "clusters[].box"),
                            require_as<double>(c, "score", "clusters[]"), require_as<int>(c, "member_count", "clusters[]")};
            validate(cluster);
            ip.clusters.push_back(cluster);
        }
        for (const auto& c : require(img, "chips", "images[]")) {
            ChipPlan chip;
            chip.chip_id = require_as<ChipId>(c, "chip_id", "chips[]");
            chip.crop = box_from_corners(require(c, "crop", "chips[]"), "chips[].crop");
            chip.resize_factor = require_as<double>(c, "resize_factor", "chips[]");
            if (!(chip.resize_factor > 0.0)) {
                throw ValidationError("chips[].resize_factor", "must be positive");
            }
            const json& padded = require(c, "padded_region", "chips[]");
            if (!padded.is_null()) {
                chip.padded_region =
                    PaddedRegion{box_from_corners(require(padded, "outer", "chips[].padded_region"), "padded_region.outer"),
                                 box_from_corners(require(padded, "inner", "chips[].padded_region"), "padded_region.inner")};
                if (!contains(chip.crop, chip.padded_region->outer)) {
                    throw ValidationError("chips[].padded_region", "must lie inside the crop");
                }
            }
            chip.provenance = parse_provenance(require(c, "provenance", "chips[]"));
            const json& proj = require(c, "projected_object_scale", "chips[]");
            if (!proj.is_null()) {
                chip.projected_object_scale = require_as<double>(c, "projected_object_scale", "chips[]");
            }
            chip.depth = require_as<int>(c, "depth", "chips[]");
            chip.depth_limited = require_as<bool>(c, "depth_limited", "chips[]");
            chip.clipped = require_as<bool>(c, "clipped", "chips[]");
            ip.chips.push_back(chip);
        }
        if (img.contains("warnings")) {
            for (const auto& w : img["warnings"]) {
                ip.warnings.push_back({require_as<int>(w, "cluster_id", "warnings[]"),
                                       require_as<std::string>(w, "message", "warnings[]")});
            }
        }
        plans.images.push_back(std::move(ip));
    }
    return plans;
}

PlanFile load_plans(const std::filesystem::path& path) { return parse_plans(read_file(path), path.string()); }

void save_plans(const PlanFile& plans, const std::filesystem::path& path) { write_file_atomic(path, dump_plans(plans)); }

std::string dump_regressor(const OffsetRegressor& model) {
    const json doc = {{"model", "offset_regressor"},
                      {"features", {"log_member_count", "log_area_fraction"}},
                      {"intercept", model.intercept()},
                      {"w_log_member_count", model.w_members()},
                      {"w_log_area_fraction", model.w_area()}};
    return doc.dump(1) + "\n";
}

OffsetRegressor parse_regressor(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    if (require_as<std::string>(doc, "model", "regressor") != "offset_regressor") {
        throw ValidationError("regressor.model", "expected \"offset_regressor\"");
    }
    return {require_as<double>(doc, "intercept", "regressor"), require_as<double>(doc, "w_log_member_count", "regressor"),
            require_as<double>(doc, "w_log_area_fraction", "regressor")};
}

std::string dump_eval(const EvalResult& r) {
    json doc = {{"images_forwarded", r.images_forwarded}, {"ap", optional_number(r.ap)},
                {"ap50", optional_number(r.ap50)},       {"ap75", optional_number(r.ap75)},
                {"ap_s", optional_number(r.ap_s)},       {"ap_m", optional_number(r.ap_m)},
                {"ap_l", optional_number(r.ap_l)}};
    doc["per_category"] = json::object();
    for (const auto& [c, v] : r.per_category_ap) {
        doc["per_category"][std::to_string(c)] = optional_number(v);
    }
    return doc.dump(1) + "\n";
}

}  // namespace clustile
