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

#include "clustile/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

namespace clustile {

namespace {

constexpr ImageId kTrainingImageBase = 1'000'000;

}  // namespace

std::string Strategy::name() const {
    switch (kind) {
        case StrategyKind::global_only:
            return "global_only";
        case StrategyKind::eip:
            return "eip_" + std::to_string(rows) + "x" + std::to_string(cols);
        case StrategyKind::clusdet:
            return "clusdet_top" + std::to_string(topn);
        case StrategyKind::clusdet_no_scalenet:
            return "clusdet_no_scalenet_top" + std::to_string(topn);
    }
    return "unknown";
}

Strategy Strategy::parse(const std::string& spec) {
    static const std::regex pattern(R"(^(global_only|eip|clusdet|clusdet_no_scalenet)(?::(\d+)(?:x(\d+))?)?$)");
    std::smatch m;
    if (!std::regex_match(spec, m, pattern)) {
        throw ValidationError("strategy", "unknown strategy \"" + spec +
                                              "\" (expected global_only, eip[:RxC], clusdet[:N] or "
                                              "clusdet_no_scalenet[:N])");
    }
    Strategy s;
    const std::string kind = m[1];
    if (kind == "global_only") {
        s.kind = StrategyKind::global_only;
        if (m[2].matched) {
            throw ValidationError("strategy", "global_only takes no argument");
        }
    } else if (kind == "eip") {
        s.kind = StrategyKind::eip;
        if (m[2].matched) {
            if (!m[3].matched) {
                throw ValidationError("strategy", "eip grid must be written RxC");
            }
            s.rows = std::stoi(m[2]);
            s.cols = std::stoi(m[3]);
        }
    } else {
        s.kind = kind == "clusdet" ? StrategyKind::clusdet : StrategyKind::clusdet_no_scalenet;
        if (m[3].matched) {
            throw ValidationError("strategy", kind + " takes a single TopN value");
        }
        if (m[2].matched) {
            s.topn = std::stoi(m[2]);
        }
    }
    if (s.rows < 1 || s.cols < 1 || s.topn < 1) {
        throw ValidationError("strategy", "grid sizes and TopN must be >= 1");
    }
    return s;
}

std::string to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::pass_through:
            return "pass_through";
        case EstimatorKind::offset_regressor:
            return "offset_regressor";
        case EstimatorKind::oracle:
            return "oracle";
    }
    return "unknown";
}

EstimatorKind parse_estimator(const std::string& s) {
    if (s == "pass_through") {
        return EstimatorKind::pass_through;
    }
    if (s == "offset_regressor") {
        return EstimatorKind::offset_regressor;
    }
    if (s == "oracle") {
        return EstimatorKind::oracle;
    }
    throw ValidationError("estimator", "unknown estimator \"" + s + "\"");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> threads;
        for (std::size_t w = 0; w < std::min(workers, n); ++w) {
            threads.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

ImageDetections global_pass(const ImageRecord& image, const PipelineConfig& cfg) {
    const ChipPlan plan = plan_global(image.extent, cfg.planner.detector_input);
    return {image.image_id, remap(simulate_detect(image, plan, cfg.detector), plan, cfg.fusion.center_rule)};
}

std::vector<ImageDetections> global_pass_all(const std::vector<ImageRecord>& images, const PipelineConfig& cfg) {
    std::vector<ImageDetections> out(images.size());
    parallel_for(images.size(), cfg.jobs, [&](std::size_t i) { out[i] = global_pass(images[i], cfg); });
    return out;
}

std::vector<Cluster> select_clusters(const ImageRecord& image, const ImageDetections& global, const Strategy& strategy,
                                     const PipelineConfig& cfg) {
    MergeParams merge = cfg.merge;
    merge.n_max = strategy.topn;
    merge.tau_op = strategy.tau_op;
    const auto proposals = propose_clusters(global.detections, cfg.proposal, image.extent);
    return icm(proposals, merge);
}

ScaleFit fit_scale_model(const Strategy& strategy, const PipelineConfig& cfg) {
    const int n = std::max(cfg.scale_training_images, 0);
    std::vector<std::vector<OffsetRegressor::Sample>> per_image(static_cast<std::size_t>(n));
    std::vector<std::vector<std::pair<double, double>>> scales(static_cast<std::size_t>(n));  // (p, s_star)
    parallel_for(static_cast<std::size_t>(n), cfg.jobs, [&](std::size_t i) {
        const ImageRecord image = generate_scene(cfg.scale_training_scene, kTrainingImageBase + static_cast<ImageId>(i));
        const ImageDetections global = global_pass(image, cfg);
        for (const auto& cluster : select_clusters(image, global, strategy, cfg)) {
            const auto sample = scale_sample(cluster, global.detections, image.annotations, image.extent);
            if (!sample) {
                continue;
            }
            const double p = reference_scale(detections_in(cluster, global.detections));
            per_image[i].push_back(*sample);
            scales[i].emplace_back(p, p * (1.0 - sample->t_star));
        }
    });

    std::vector<OffsetRegressor::Sample> samples;
    std::vector<std::pair<double, double>> ps;
    for (std::size_t i = 0; i < per_image.size(); ++i) {
        samples.insert(samples.end(), per_image[i].begin(), per_image[i].end());
        ps.insert(ps.end(), scales[i].begin(), scales[i].end());
    }

    ScaleFit fit;
    fit.model = OffsetRegressor::fit(samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [p, s_star] = ps[i];
        const double t_hat = fit.model.predict(samples[i].features);
        fit.records.push_back(ScaleRecord::make(static_cast<int>(i), p, p * (1.0 - t_hat), s_star));
    }
    if (!fit.records.empty()) {
        fit.training_loss = scale_loss(fit.records);
    }
    return fit;
}

ScaleEstimator make_estimator(const Strategy& strategy, const std::optional<ScaleFit>& fit, const ImageRecord& image) {
    if (strategy.kind != StrategyKind::clusdet) {
        return PassThroughEstimator{};
    }
    switch (strategy.estimator) {
        case EstimatorKind::pass_through:
            return PassThroughEstimator{};
        case EstimatorKind::offset_regressor:
            if (!fit) {
                throw ScaleError("offset_regressor estimator needs a fitted model");
            }
            return OffsetRegressorEstimator{fit->model};
        case EstimatorKind::oracle:
            return OracleEstimator{image.annotations};
    }
    return PassThroughEstimator{};
}

ImagePlan plan_image(const ImageRecord& image, const ImageDetections* global, const Strategy& strategy,
                     const PipelineConfig& cfg, const ScaleEstimator& estimator) {
    ImagePlan plan;
    plan.image_id = image.image_id;
    plan.extent = image.extent;

    switch (strategy.kind) {
        case StrategyKind::global_only:
            plan.chips.push_back(plan_global(image.extent, cfg.planner.detector_input));
            return plan;
        case StrategyKind::eip:
            plan.chips = plan_eip(image.extent, strategy.rows, strategy.cols, strategy.overlap,
                                  cfg.planner.detector_input);
            return plan;
        case StrategyKind::clusdet:
        case StrategyKind::clusdet_no_scalenet:
            break;
    }

    if (global == nullptr) {
        throw ValidationError("global_detections", "cluster strategies need the initial global pass");
    }
    PlannerParams planner = cfg.planner;
    planner.scale_lo = strategy.scale_lo;
    planner.scale_hi = strategy.scale_hi;
    planner.max_partition_depth = strategy.depth;
    planner.partition_and_padding = strategy.kind == StrategyKind::clusdet;
    const ScaleEstimator chosen =
        strategy.kind == StrategyKind::clusdet ? estimator : ScaleEstimator{PassThroughEstimator{}};

    std::vector<PlanWarning> skipped;
    std::vector<double> scales;
    for (const auto& cluster : select_clusters(image, *global, strategy, cfg)) {
        try {
            scales.push_back(estimate_scale(cluster, global->detections, chosen, image.extent));
            plan.clusters.push_back(cluster);
        } catch (const ScaleError& e) {
            skipped.push_back({static_cast<int>(plan.clusters.size()), std::string("cluster skipped: ") + e.what()});
        }
    }
    auto planned = plan_pipeline(image, plan.clusters, scales, planner);
    plan.chips = std::move(planned.chips);
    plan.warnings = std::move(skipped);
    plan.warnings.insert(plan.warnings.end(), planned.warnings.begin(), planned.warnings.end());
    return plan;
}

ImageDetections detect_image(const ImageRecord& image, const ImagePlan& plan, const DetectorModel& model) {
    ImageDetections raw{image.image_id, {}};
    for (const auto& chip : plan.chips) {
        for (auto d : simulate_detect(image, chip, model)) {
            d.source = DetectionSource::chip(chip.chip_id);
            raw.detections.push_back(d);
        }
    }
    return raw;
}

ImageDetections fuse_image(const ImagePlan& plan, const ImageDetections& raw, const FusionParams& p) {
    std::map<ChipId, std::vector<Detection>> by_chip;
    for (const auto& d : raw.detections) {
        if (!d.source.is_chip()) {
            throw ValidationError("raw_detections.source", "raw detections must carry their chip id");
        }
        by_chip[d.source.chip_id].push_back(d);
    }

    std::vector<Detection> global;
    std::vector<std::vector<Detection>> chips;
    std::vector<bool> cluster_used(plan.clusters.size(), false);
    for (const auto& chip : plan.chips) {
        if (chip.provenance.kind == Provenance::Kind::cluster &&
            static_cast<std::size_t>(chip.provenance.cluster_id) < cluster_used.size()) {
            cluster_used[static_cast<std::size_t>(chip.provenance.cluster_id)] = true;
        }
        const auto it = by_chip.find(chip.chip_id);
        if (it == by_chip.end()) {
            continue;
        }
        auto remapped = remap(it->second, chip, p.center_rule);
        if (chip.provenance.kind == Provenance::Kind::global_pass) {
            global.insert(global.end(), remapped.begin(), remapped.end());
        } else {
            chips.push_back(std::move(remapped));
        }
        by_chip.erase(it);
    }
    if (!by_chip.empty()) {
        throw ValidationError("raw_detections.chip_id",
                              "image " + std::to_string(plan.image_id) + " has detections for unknown chip " +
                                  std::to_string(by_chip.begin()->first));
    }

    std::vector<Cluster> active;
    for (std::size_t i = 0; i < plan.clusters.size(); ++i) {
        if (cluster_used[i]) {
            active.push_back(plan.clusters[i]);
        }
    }
    return {plan.image_id, fuse(global, chips, active, p)};
}

StrategyRun run_strategy(const std::vector<ImageRecord>& images, const Strategy& strategy, const PipelineConfig& cfg,
                         const std::vector<ImageDetections>* global) {
    StrategyRun run;
    run.strategy = strategy;

    std::vector<ImageDetections> own_global;
    if (strategy.uses_clusters() && global == nullptr) {
        own_global = global_pass_all(images, cfg);
        global = &own_global;
    }
    if (strategy.kind == StrategyKind::clusdet && strategy.estimator == EstimatorKind::offset_regressor) {
        run.scale_fit = fit_scale_model(strategy, cfg);
    }

    const std::size_t n = images.size();
    run.plans.resize(n);
    run.raw.resize(n);
    run.final_detections.resize(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const ImageDetections* g = global ? &(*global)[i] : nullptr;
        if (g && g->image_id != images[i].image_id) {
            throw ValidationError("global_detections", "image order does not match the dataset");
        }
        run.plans[i] = plan_image(images[i], g, strategy, cfg, make_estimator(strategy, run.scale_fit, images[i]));
        run.raw[i] = detect_image(images[i], run.plans[i], cfg.detector);
        run.final_detections[i] = fuse_image(run.plans[i], run.raw[i], cfg.fusion);
    });

    run.eval = coco_ap(run.final_detections, images, cfg.eval);
    for (const auto& plan : run.plans) {
        run.eval.images_forwarded += static_cast<long long>(plan.chips.size());
    }
    return run;
}

}  // namespace clustile
