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

#include <cstdlib>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "clustile/cli/commands.hpp"
#include "clustile/cli/config.hpp"
#include "clustile/cli/report.hpp"
#include "clustile/io.hpp"

using namespace clustile;
using namespace clustile::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("clustile_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int invoke(std::vector<std::string> args) {
    ::setenv("CLUSTILE_LOG", "error", 1);
    args.insert(args.begin(), "clustile");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> base(const TempDir& d, std::vector<std::string> extra) {
    std::vector<std::string> a{"--out", d.path.string(), "--set", "images=6", "--set", "scale_model.training_images=4"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
}

}  // namespace

TEST_CASE("default config converts and rejects unknown keys") {
    auto c = default_config();
    const RunConfig rc = to_run_config(c);
    CHECK(rc.images == 100);
    CHECK(rc.strategy.kind == StrategyKind::clusdet);
    CHECK(rc.compare.size() == 4);
    CHECK(rc.topn_sweep.size() == 8);
    CHECK(rc.pipeline.detector.seed == rc.seed);

    auto bad = default_config();
    bad["scene"]["widht"] = 10;
    CHECK_THROWS_AS(to_run_config(bad), ConfigError);
    bad = default_config();
    bad["proposal"]["score_mode"] = "median";
    CHECK_THROWS_AS(to_run_config(bad), ConfigError);
    bad = default_config();
    bad["images"] = "many";
    CHECK_THROWS_AS(to_run_config(bad), ConfigError);
    bad = default_config();
    bad["seed"] = -1;
    CHECK_THROWS_AS(to_run_config(bad), ConfigError);
}

TEST_CASE("dotted overrides") {
    auto c = default_config();
    apply_assignment(c, "scene.width=2000");
    apply_assignment(c, "strategy=eip");
    apply_assignment(c, "eip.rows=3");
    CHECK(c["scene"]["width"] == 2000);
    const auto rc = to_run_config(c);
    CHECK(rc.scene.width == 2000);
    CHECK(rc.strategy.name() == "eip_3x3");
    CHECK_THROWS_AS(apply_assignment(c, "novalue"), ConfigError);
    CHECK(resolve_strategy("clusdet:7", c).topn == 7);
    CHECK_THROWS_AS(resolve_strategy("tiles", c), ConfigError);
}

TEST_CASE("stage commands chain through files") {
    TempDir d;
    CHECK(invoke(base(d, {"simulate"})) == exit_ok);
    CHECK(fs::exists(d.path / "dataset.json"));
    for (const char* stage : {"plan", "detect", "fuse", "eval"}) {
        CHECK(invoke(base(d, {"--strategy", "clusdet", stage})) == exit_ok);
    }
    CHECK(fs::exists(d.path / "global_detections.json"));
    CHECK(fs::exists(d.path / "clusdet_top3" / "scale_model.json"));
    CHECK(fs::exists(d.path / "clusdet_top3" / "eval.json"));
    const auto eval = nlohmann::json::parse(read_file(d.path / "clusdet_top3" / "eval.json"));
    CHECK(eval.contains("ap"));

    CHECK(invoke(base(d, {"report"})) == exit_ok);
    const auto csv = read_file(d.path / "chip_types.csv");
    CHECK(csv.rfind("planning,chips,sparse,common,clustered,zero\n", 0) == 0);
    CHECK(csv.find("grid_4x6,144,") != std::string::npos);
    CHECK(fs::exists(d.path / "chip_types.svg"));
}

TEST_CASE("fuse is reproducible from files alone") {
    TempDir d;
    CHECK(invoke(base(d, {"simulate"})) == exit_ok);
    CHECK(invoke(base(d, {"--strategy", "eip", "plan"})) == exit_ok);
    CHECK(invoke(base(d, {"--strategy", "eip", "detect"})) == exit_ok);
    CHECK(invoke(base(d, {"--strategy", "eip", "fuse"})) == exit_ok);
    const auto first = read_file(d.path / "eip_2x3" / "detections.json");
    CHECK(invoke(base(d, {"--strategy", "eip", "fuse"})) == exit_ok);
    CHECK(read_file(d.path / "eip_2x3" / "detections.json") == first);
}

TEST_CASE("perfect detector evaluates to AP 1 through the CLI") {
    TempDir d;
    const std::vector<std::string> perfect{"--set", "detector.recall_curve=[[1,1]]", "--set",
                                           "detector.loc_noise_frac=0", "--set", "detector.fp_rate=0",
                                           "--set", "fusion.nms_iou=0.999",
                                           "--strategy", "global_only"};
    auto with = [&](const char* cmd) {
        auto a = base(d, perfect);
        a.push_back(cmd);
        return invoke(a);
    };
    CHECK(with("simulate") == exit_ok);
    CHECK(with("plan") == exit_ok);
    CHECK(with("detect") == exit_ok);
    CHECK(with("fuse") == exit_ok);
    CHECK(with("eval") == exit_ok);
    const auto eval = nlohmann::json::parse(read_file(d.path / "global_only" / "eval.json"));
    CHECK(eval["ap"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("errors map to distinct exit codes") {
    TempDir d;
    CHECK(invoke(base(d, {"--strategy", "eip", "fuse"})) == exit_missing_input);
    CHECK(invoke(base(d, {"--strategy", "sliding", "plan"})) == exit_usage);
    CHECK(invoke(base(d, {"--set", "scene.bogus=1", "simulate"})) == exit_usage);
    CHECK(invoke({"--out", d.path.string()}) == exit_usage);
    CHECK(invoke({"--out", d.path.string(), "frobnicate"}) == exit_usage);

    write_file_atomic(d.path / "dataset.json", "{\"images\": [ }");
    CHECK(invoke(base(d, {"--strategy", "eip", "plan"})) == exit_invalid_input);
    write_file_atomic(d.path / "dataset.json", R"({"images": [{"id": 1, "width": -4, "height": 10}]})");
    CHECK(invoke(base(d, {"--strategy", "eip", "plan"})) == exit_invalid_input);
}

TEST_CASE("chip-type csv formatting") {
    ChipTypeCounts c;
    c.sparse = 2;
    c.common = 1;
    c.clustered = 1;
    c.zero = 1;
    const std::vector<ChipTypeRow> rows{{"grid_2x3", c}, {"cluster", {}}};
    CHECK(chip_types_csv(rows) ==
          "planning,chips,sparse,common,clustered,zero\n"
          "grid_2x3,4,0.500000,0.250000,0.250000,0.250000\n"
          "cluster,0,,,,\n");
    CHECK(chip_types_svg(rows).find("<svg") == 0);
    CHECK(fixed(2.0 / 3.0, 3) == "0.667");
}
