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

#include "clustile/cli/commands.hpp"

#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "clustile/cli/report.hpp"
#include "clustile/io.hpp"

namespace clustile::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

MissingInputError::MissingInputError(const fs::path& path, const std::string& hint)
    : std::runtime_error(path.string() + " does not exist (" + hint + ")"), path_(path) {}

namespace {

void require_file(const fs::path& path, const std::string& hint) {
    if (!fs::exists(path)) {
        throw MissingInputError(path, hint);
    }
}

fs::path dataset_path(const RunConfig& rc) {
    return rc.dataset ? *rc.dataset : Layout{rc.out}.dataset();
}

std::vector<ImageRecord> load_images(const RunConfig& rc) {
    const fs::path path = dataset_path(rc);
    require_file(path, "run `clustile simulate` first");
    return load_dataset(path);
}

std::string plan_hint(const Strategy& s) { return "run `clustile plan --strategy " + s.name() + "` first"; }

/// Plans looked up by image id; every plan must belong to a dataset image.
std::map<ImageId, const ImagePlan*> index_plans(const PlanFile& plans, const std::vector<ImageRecord>& images) {
    std::map<ImageId, const ImagePlan*> by_id;
    for (const auto& p : plans.images) {
        by_id[p.image_id] = &p;
    }
    for (const auto& image : images) {
        if (!by_id.count(image.image_id)) {
            throw ValidationError("plans.images", "no plan for image " + std::to_string(image.image_id));
        }
    }
    if (by_id.size() != images.size()) {
        throw ValidationError("plans.images", "plans reference images that are not in the dataset");
    }
    return by_id;
}

std::vector<ImageDetections> align(const std::vector<ImageDetections>& dets, const std::vector<ImageId>& ids) {
    std::map<ImageId, const ImageDetections*> by_id;
    for (const auto& d : dets) {
        by_id[d.image_id] = &d;
    }
    std::vector<ImageDetections> out;
    out.reserve(ids.size());
    for (const ImageId id : ids) {
        const auto it = by_id.find(id);
        out.push_back(it == by_id.end() ? ImageDetections{id, {}} : *it->second);
        if (it != by_id.end()) {
            by_id.erase(it);
        }
    }
    if (!by_id.empty()) {
        throw ValidationError("detections.image_id",
                              "detections for unknown image " + std::to_string(by_id.begin()->first));
    }
    return out;
}

std::vector<ImageId> image_ids(const std::vector<ImageRecord>& images) {
    std::vector<ImageId> ids;
    ids.reserve(images.size());
    for (const auto& i : images) {
        ids.push_back(i.image_id);
    }
    return ids;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

std::vector<ImageDetections> ensure_global(const RunConfig& rc, const std::vector<ImageRecord>& images) {
    const Layout layout{rc.out};
    if (!fs::exists(layout.global_detections())) {
        spdlog::info("initial global pass over {} images", images.size());
        save_detections(global_pass_all(images, rc.pipeline), layout.global_detections());
    }
    return align(load_detections(layout.global_detections()), image_ids(images));
}

std::string eval_row(const Strategy& s, const EvalResult& r) {
    const std::vector<std::pair<std::string, EvalResult>> rows{{s.name(), r}};
    return format_table(rows);
}

ordered_json metric(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string csv_metric(const std::optional<double>& v) { return v ? fixed(*v, 6) : "undefined"; }

void run_all_stages(const RunConfig& rc, const Strategy& s) {
    cmd_plan(rc, s);
    cmd_detect(rc, s);
    cmd_fuse(rc, s);
}

}  // namespace

std::vector<ImageRecord> cmd_simulate(const RunConfig& rc) {
    const Layout layout{rc.out};
    ensure_dir(layout.root);
    std::vector<ImageRecord> images;
    if (rc.dataset) {
        require_file(*rc.dataset, "the configured dataset path");
        images = load_dataset(*rc.dataset);
    } else {
        images = generate_dataset(rc.scene, rc.images);
    }
    save_dataset(images, layout.dataset());
    std::error_code ec;
    fs::remove(layout.global_detections(), ec);
    std::size_t objects = 0;
    for (const auto& i : images) {
        objects += i.annotations.size();
    }
    spdlog::info("wrote {} images with {} objects to {}", images.size(), objects, layout.dataset().string());
    return images;
}

void cmd_plan(const RunConfig& rc, const Strategy& s) {
    const Layout layout{rc.out};
    const auto images = load_images(rc);
    ensure_dir(layout.strategy_dir(s));

    std::vector<ImageDetections> global;
    if (s.uses_clusters()) {
        global = ensure_global(rc, images);
    }

    std::optional<ScaleFit> fit;
    if (s.kind == StrategyKind::clusdet && s.estimator == EstimatorKind::offset_regressor) {
        fit = fit_scale_model(s, rc.pipeline);
        write_file_atomic(layout.scale_model(s), dump_regressor(fit->model));
        if (fit->training_loss) {
            spdlog::info("scale model fitted on {} clusters, training loss {:.6f}", fit->records.size(),
                         *fit->training_loss);
        }
    }

    PlanFile plans{s.name(), std::vector<ImagePlan>(images.size())};
    parallel_for(images.size(), rc.pipeline.jobs, [&](std::size_t i) {
        const ImageDetections* g = s.uses_clusters() ? &global[i] : nullptr;
        plans.images[i] = plan_image(images[i], g, s, rc.pipeline, make_estimator(s, fit, images[i]));
    });

    std::size_t chips = 0;
    for (const auto& p : plans.images) {
        chips += p.chips.size();
        for (const auto& w : p.warnings) {
            spdlog::debug("image {} cluster {}: {}", p.image_id, w.cluster_id, w.message);
        }
    }
    save_plans(plans, layout.plans(s));
    spdlog::info("{}: planned {} chips for {} images", s.name(), chips, images.size());
}

void cmd_detect(const RunConfig& rc, const Strategy& s) {
    const Layout layout{rc.out};
    const auto images = load_images(rc);
    require_file(layout.plans(s), plan_hint(s));
    const PlanFile plans = load_plans(layout.plans(s));
    const auto by_id = index_plans(plans, images);

    std::vector<ImageDetections> raw(images.size());
    parallel_for(images.size(), rc.pipeline.jobs, [&](std::size_t i) {
        raw[i] = detect_image(images[i], *by_id.at(images[i].image_id), rc.pipeline.detector);
    });
    save_detections(raw, layout.raw_detections(s));
    spdlog::info("{}: wrote raw detections to {}", s.name(), layout.raw_detections(s).string());
}

void cmd_fuse(const RunConfig& rc, const Strategy& s) {
    const Layout layout{rc.out};
    require_file(layout.plans(s), plan_hint(s));
    require_file(layout.raw_detections(s), "run `clustile detect --strategy " + s.name() + "` first");
    const PlanFile plans = load_plans(layout.plans(s));
    std::vector<ImageId> ids;
    for (const auto& p : plans.images) {
        ids.push_back(p.image_id);
    }
    const auto raw = align(load_detections(layout.raw_detections(s)), ids);

    std::vector<ImageDetections> fused(plans.images.size());
    parallel_for(plans.images.size(), rc.pipeline.jobs,
                 [&](std::size_t i) { fused[i] = fuse_image(plans.images[i], raw[i], rc.pipeline.fusion); });
    save_detections(fused, layout.detections(s));
    spdlog::info("{}: wrote fused detections to {}", s.name(), layout.detections(s).string());
}

EvalResult cmd_eval(const RunConfig& rc, const Strategy& s) {
    const Layout layout{rc.out};
    const auto images = load_images(rc);
    require_file(layout.detections(s), "run `clustile fuse --strategy " + s.name() + "` first");
    require_file(layout.plans(s), plan_hint(s));
    const auto dets = align(load_detections(layout.detections(s)), image_ids(images));
    const PlanFile plans = load_plans(layout.plans(s));
    index_plans(plans, images);

    EvalResult result = coco_ap(dets, images, rc.pipeline.eval);
    std::vector<std::vector<ChipPlan>> chips;
    for (const auto& p : plans.images) {
        chips.push_back(p.chips);
    }
    result.images_forwarded = count_forwarded(chips);

    write_file_atomic(layout.eval_json(s), dump_eval(result));
    write_file_atomic(layout.eval_txt(s), eval_row(s, result));
    spdlog::info("{}: AP {} over {} forwarded chips", s.name(), format_metric(result.ap), result.images_forwarded);
    return result;
}

void cmd_compare(const RunConfig& rc) {
    const Layout layout{rc.out};
    cmd_simulate(rc);
    write_file_atomic(layout.config(), rc.source.dump(2) + "\n");

    std::vector<std::pair<std::string, EvalResult>> rows;
    ordered_json summary = ordered_json::array();
    for (const auto& s : rc.compare) {
        run_all_stages(rc, s);
        const EvalResult r = cmd_eval(rc, s);
        rows.emplace_back(s.name(), r);
        summary.push_back({{"strategy", s.name()}, {"eval", ordered_json::parse(dump_eval(r))}});
    }
    const std::string table = format_table(rows);
    write_file_atomic(layout.root / "compare.txt", table);
    write_file_atomic(layout.root / "compare.json", summary.dump(2) + "\n");
    spdlog::info("comparison table:\n{}", table);

    if (rc.topn_sweep.empty()) {
        return;
    }
    Strategy base = rc.strategy.uses_clusters() ? rc.strategy : Strategy{};
    RunConfig sweep_rc = rc;
    sweep_rc.out = layout.root / "sweep";
    sweep_rc.dataset = layout.dataset();
    ensure_dir(sweep_rc.out);
    std::error_code ec;
    fs::remove(Layout{sweep_rc.out}.global_detections(), ec);

    std::ostringstream csv;
    csv << "topn,images_forwarded,chips_per_image,ap,ap50,ap75,ap_s,ap_m,ap_l\n";
    ordered_json sweep = ordered_json::array();
    const auto n_images = static_cast<double>(load_images(sweep_rc).size());
    for (const int n : rc.topn_sweep) {
        Strategy s = base;
        s.topn = n;
        run_all_stages(sweep_rc, s);
        const EvalResult r = cmd_eval(sweep_rc, s);
        csv << n << ',' << r.images_forwarded << ',' << fixed(static_cast<double>(r.images_forwarded) / n_images, 6)
            << ',' << csv_metric(r.ap) << ',' << csv_metric(r.ap50) << ',' << csv_metric(r.ap75) << ','
            << csv_metric(r.ap_s) << ',' << csv_metric(r.ap_m) << ',' << csv_metric(r.ap_l) << '\n';
        sweep.push_back({{"topn", n},
                         {"strategy", s.name()},
                         {"images_forwarded", r.images_forwarded},
                         {"ap", metric(r.ap)},
                         {"ap50", metric(r.ap50)},
                         {"ap75", metric(r.ap75)},
                         {"ap_s", metric(r.ap_s)},
                         {"ap_m", metric(r.ap_m)},
                         {"ap_l", metric(r.ap_l)}});
    }
    write_file_atomic(layout.root / "topn_sweep.csv", csv.str());
    write_file_atomic(layout.root / "topn_sweep.json", sweep.dump(2) + "\n");
}

void cmd_report(const RunConfig& rc) {
    const Layout layout{rc.out};
    const auto images = load_images(rc);
    const Strategy& s = rc.report.strategy;
    if (!fs::exists(layout.plans(s))) {
        cmd_plan(rc, s);
    }
    const PlanFile plans = load_plans(layout.plans(s));
    const auto by_id = index_plans(plans, images);

    ChipTypeRow cluster_row{"cluster", {}};
    ChipTypeRow grid_row{"grid_" + std::to_string(rc.report.grid_rows) + "x" + std::to_string(rc.report.grid_cols),
                         {}};
    for (const auto& image : images) {
        std::vector<ChipPlan> cluster_chips;
        for (const auto& chip : by_id.at(image.image_id)->chips) {
            if (chip.provenance.kind != Provenance::Kind::global_pass) {
                cluster_chips.push_back(chip);
            }
        }
        cluster_row.counts += count_chip_types(cluster_chips, image.annotations, rc.report.chip_types);
        const auto grid = plan_eip(image.extent, rc.report.grid_rows, rc.report.grid_cols, 0.0,
                                   rc.pipeline.planner.detector_input);
        grid_row.counts += count_chip_types(grid, image.annotations, rc.report.chip_types);
    }
    const std::vector<ChipTypeRow> rows{grid_row, cluster_row};
    write_file_atomic(layout.root / "chip_types.csv", chip_types_csv(rows));
    write_file_atomic(layout.root / "chip_types.svg", chip_types_svg(rows));
    spdlog::info("chip types written to {}", (layout.root / "chip_types.csv").string());
}

namespace {

void setup_logging() {
    auto logger = spdlog::get("clustile");
    if (!logger) {
        logger = spdlog::stderr_logger_mt("clustile");
        logger->set_pattern("[%l] %v");
    }
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("CLUSTILE_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off") {
            spdlog::warn("CLUSTILE_LOG=\"{}\" is not a log level, keeping info", env);
        } else {
            spdlog::set_level(level);
        }
    }
}

ordered_json read_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError&) {
        throw MissingInputError(path, "the --config file");
    }
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path, std::string("not valid JSON: ") + e.what());
    }
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Cluster-driven chip planning for detection in large aerial images", "clustile"};
    app.set_version_flag("--version", std::string(CLUSTILE_VERSION));
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> strategy;
    std::optional<int> topn;
    std::optional<int> jobs;
    std::vector<std::string> assignments;
    app.add_option("--config", config_path, "JSON config document")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Scene and detector seed");
    app.add_option("--out", out, "Output directory");
    app.add_option("--strategy", strategy,
                   "global_only | eip[:RxC] | clusdet[:N] | clusdet_no_scalenet[:N]");
    app.add_option("--topn", topn, "Cluster chips kept per image")->check(CLI::PositiveNumber);
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--set", assignments, "Override a config key, e.g. --set scene.width=2000");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "Generate the synthetic dataset"},
        {"plan", "Plan chips for the selected strategy"},
        {"detect", "Run the simulated detector over planned chips"},
        {"fuse", "Fuse chip and global detections"},
        {"eval", "COCO-style evaluation of fused detections"},
        {"compare", "Run every stage for all compared strategies and the TopN sweep"},
        {"report", "Chip-type histogram of cluster chips against a grid"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    setup_logging();
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        ordered_json config = default_config();
        if (!config_path.empty()) {
            merge_config(config, read_config_file(config_path));
        }
        for (const auto& a : assignments) {
            apply_assignment(config, a);
        }
        if (seed) {
            config["seed"] = *seed;
        }
        if (out) {
            config["out"] = *out;
        }
        if (strategy) {
            config["strategy"] = *strategy;
        }
        if (topn) {
            config["topn"] = *topn;
        }
        if (jobs) {
            config["jobs"] = *jobs;
        }
        RunConfig rc = to_run_config(config);
        if (topn && rc.strategy.uses_clusters()) {
            rc.strategy.topn = *topn;
        }

        if (command == "simulate") {
            cmd_simulate(rc);
        } else if (command == "plan") {
            cmd_plan(rc, rc.strategy);
        } else if (command == "detect") {
            cmd_detect(rc, rc.strategy);
        } else if (command == "fuse") {
            cmd_fuse(rc, rc.strategy);
        } else if (command == "eval") {
            std::fputs(eval_row(rc.strategy, cmd_eval(rc, rc.strategy)).c_str(), stdout);
        } else if (command == "compare") {
            cmd_compare(rc);
            std::fputs(read_file(Layout{rc.out}.root / "compare.txt").c_str(), stdout);
        } else if (command == "report") {
            cmd_report(rc);
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        spdlog::error("invalid config: {}", e.what());
        return exit_usage;
    } catch (const MissingInputError& e) {
        spdlog::error("missing input: {}", e.what());
        return exit_missing_input;
    } catch (const ParseError& e) {
        spdlog::error("malformed JSON: {}", e.what());
        return exit_invalid_input;
    } catch (const ValidationError& e) {
        spdlog::error("schema violation in {}: {}", e.field(), e.what());
        return exit_invalid_input;
    } catch (const IoError& e) {
        spdlog::error("file error: {}", e.what());
        return exit_missing_input;
    } catch (const std::exception& e) {
        spdlog::error("{} failed: {}", command, e.what());
        return exit_stage_failure;
    }
}

}  // namespace clustile::cli
