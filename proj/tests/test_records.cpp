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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "clustile/io.hpp"
#include "clustile/records.hpp"
#include "support/gen.hpp"

using namespace clustile;

namespace {

// Coordinates on a 1e-3 lattice survive the 6-digit on-disk format exactly.
double snap(double v) { return std::round(v * 1000.0) / 1000.0; }

double lattice(gen::Source& src, double lo, double hi) { return snap(src.real(lo, hi)); }

ImageRecord random_record(gen::Source& src, ImageId id) {
    ImageRecord r;
    r.image_id = id;
    r.extent = ImageExtent(src.integer(200, 2000), src.integer(200, 2000));
    const int n = src.integer(0, 12);
    for (int i = 0; i < n; ++i) {
        const double w = lattice(src, 1, 80);
        const double h = lattice(src, 1, 80);
        const double x = lattice(src, 0, r.extent.width - 81);
        const double y = lattice(src, 0, r.extent.height - 81);
        r.annotations.push_back({Box(x, y, snap(x + w), snap(y + h)), src.integer(1, 4), i * 3 + 1});
    }
    return r;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("clustile_records_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("validation of records") {
    CHECK_THROWS_AS(validate(Annotation{Box(0, 0, 1, 1), 0, 1}), ValidationError);
    CHECK_THROWS_AS(validate(Detection{Box(0, 0, 1, 1), 1, 1.5, {}, false}), ValidationError);
    CHECK_THROWS_AS(validate(Detection{Box(0, 0, 1, 1), 1, -0.1, {}, false}), ValidationError);
    CHECK_THROWS_AS(validate(Detection{Box(0, 0, 1, 1), 1, 0.5, DetectionSource::global(), true}), ValidationError);
    CHECK_NOTHROW(validate(Detection{Box(0, 0, 1, 1), 1, 0.5, DetectionSource::chip(3), true}));
    CHECK_THROWS_AS(validate(Cluster{Box(0, 0, 1, 1), 1.2, 0}), ValidationError);
    ImageRecord r;
    r.extent = ImageExtent(10, 10);
    r.annotations.push_back({Box(5, 5, 11, 9), 1, 1});
    CHECK_THROWS_AS(validate(r), ValidationError);
}

TEST_CASE("empty files load as empty lists") {
    CHECK(parse_dataset("").empty());
    CHECK(parse_dataset("  \n").empty());
    CHECK(parse_detections("").empty());
    CHECK(parse_detections("[]").empty());
}

TEST_CASE("score outside [0,1] is a validation error naming the field") {
    const std::string text = R"([{"image_id": 1, "category_id": 1, "bbox": [0, 0, 5, 5], "score": 1.5}])";
    try {
        parse_detections(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "detections[].score");
    }
}

TEST_CASE("malformed JSON reports line and column") {
    const std::string text = "{\n  \"images\": [\n    {\"id\": 1,, }\n  ]\n}";
    try {
        parse_dataset(text, "broken.json");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() > 0);
        CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
    }
}

TEST_CASE("schema violations name the field") {
    CHECK_THROWS_WITH_AS(parse_dataset(R"({"images": [{"id": 1, "width": 10}]})"),
                         doctest::Contains("height"), ValidationError);
    CHECK_THROWS_AS(parse_dataset(R"({"images": [{"id": 1, "width": 10, "height": 10}],
        "annotations": [{"id": 1, "image_id": 2, "category_id": 1, "bbox": [0,0,1,1]}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_detections(R"([{"image_id": 1, "category_id": 1, "bbox": [0, 0, 0, 5], "score": 0.5}])"),
                    ValidationError);
    CHECK_THROWS_AS(parse_detections(R"({"image_id": 1})"), ValidationError);
}

TEST_CASE("dataset round trip through files preserves every field") {
    gen::Source src(21);
    std::vector<ImageRecord> images;
    for (int i = 0; i < 50; ++i) {
        images.push_back(random_record(src, 50 - i));
    }
    TempDir dir;
    save_dataset(images, dir.path / "d.json");
    const auto back = load_dataset(dir.path / "d.json");
    std::sort(images.begin(), images.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
    CHECK(back == images);
    CHECK(dump_dataset(back) == dump_dataset(images));
}

TEST_CASE("detection round trip preserves fields and orders by descending score") {
    gen::Source src(22);
    std::vector<ImageDetections> dets;
    for (int i = 0; i < 50; ++i) {
        ImageDetections g{i + 1, {}};
        const int n = src.integer(0, 15);
        for (int k = 0; k < n; ++k) {
            const double x = lattice(src, 0, 900);
            const double y = lattice(src, 0, 900);
            Detection d{Box(x, y, snap(x + lattice(src, 1, 90)), snap(y + lattice(src, 1, 90))), src.integer(1, 3),
                        lattice(src, 0, 1), DetectionSource::global(), false};
            if (src.coin()) {
                d.source = DetectionSource::chip(src.integer(1, 9));
                d.in_padded_region = src.coin();
            }
            g.detections.push_back(d);
        }
        sort_by_rank(g.detections);
        if (!g.detections.empty()) {
            dets.push_back(g);
        }
    }
    TempDir dir;
    save_detections(dets, dir.path / "det.json");
    const auto back = load_detections(dir.path / "det.json");
    CHECK(back == dets);
    for (const auto& g : back) {
        for (std::size_t i = 1; i < g.detections.size(); ++i) {
            CHECK(g.detections[i - 1].score >= g.detections[i].score);
        }
    }
}

TEST_CASE("coordinates are written with six fractional digits") {
    std::vector<ImageDetections> dets{{1, {{Box(0.1234567, 0, 10, 10), 1, 0.5, {}, false}}}};
    const auto back = parse_detections(dump_detections(dets));
    CHECK(back[0].detections[0].box.x_min() == 0.123457);
}

TEST_CASE("rank order breaks score ties by area then coordinates") {
    std::vector<Detection> d{{Box(0, 0, 2, 2), 1, 0.5, {}, false},
                             {Box(5, 5, 9, 9), 1, 0.5, {}, false},
                             {Box(1, 0, 5, 4), 1, 0.5, {}, false},
                             {Box(0, 0, 1, 1), 1, 0.9, {}, false}};
    sort_by_rank(d);
    CHECK(d[0].score == 0.9);
    CHECK(d[1].box == Box(1, 0, 5, 4));
    CHECK(d[2].box == Box(5, 5, 9, 9));
    CHECK(d[3].box == Box(0, 0, 2, 2));
}

TEST_CASE("regressor JSON round trip") {
    const OffsetRegressor m(0.125, -0.5, 0.0625);
    CHECK(parse_regressor(dump_regressor(m)) == m);
}

TEST_CASE("plan file round trip") {
    PlanFile f;
    f.strategy = "clusdet_top3";
    ImagePlan ip;
    ip.image_id = 7;
    ip.extent = ImageExtent(300, 200);
    ip.clusters.push_back({Box(10, 10, 60, 50), 0.5, 4});
    ChipPlan g;
    g.crop = Box(0, 0, 300, 200);
    g.resize_factor = 3.0;
    ChipPlan c;
    c.chip_id = 1;
    c.crop = Box(5, 5, 65, 55);
    c.resize_factor = 12.0;
    c.padded_region = PaddedRegion{Box(5, 5, 65, 55), Box(10, 10, 60, 50)};
    c.provenance = Provenance::cluster(0, 0);
    c.projected_object_scale = 280.0;
    ip.chips = {g, c};
    ip.warnings.push_back({2, "dropped"});
    f.images.push_back(ip);
    const PlanFile back = parse_plans(dump_plans(f));
    CHECK(back.strategy == f.strategy);
    REQUIRE(back.images.size() == 1);
    CHECK(back.images[0].chips == ip.chips);
    CHECK(back.images[0].clusters == ip.clusters);
    CHECK(back.images[0].warnings.size() == 1);
    CHECK(dump_plans(back) == dump_plans(f));
}

TEST_CASE("missing file raises an io error") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/clustile/dataset.json"), IoError);
}
