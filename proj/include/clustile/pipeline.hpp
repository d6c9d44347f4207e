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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "clustile/chip_planner.hpp"
#include "clustile/clustering.hpp"
#include "clustile/evaluation.hpp"
#include "clustile/fusion.hpp"
#include "clustile/merging.hpp"
#include "clustile/records.hpp"
#include "clustile/scale.hpp"
#include "clustile/simulator.hpp"

namespace clustile {

enum class StrategyKind { global_only, eip, clusdet, clusdet_no_scalenet };
enum class EstimatorKind { pass_through, offset_regressor, oracle };

/// One row of the ablation: which chips get forwarded for each image.
struct Strategy {
    StrategyKind kind = StrategyKind::clusdet;
    int rows = 2;
    int cols = 3;
    double overlap = 0.0;
    int topn = 3;
    double tau_op = 0.7;
    double scale_lo = 70.0;
    double scale_hi = 280.0;
    int depth = 2;
    EstimatorKind estimator = EstimatorKind::offset_regressor;

    bool uses_clusters() const noexcept {
        return kind == StrategyKind::clusdet || kind == StrategyKind::clusdet_no_scalenet;
    }
    /// Directory-safe name, e.g. "eip_2x3" or "clusdet_top3".
    std::string name() const;

    /// Accepts "global_only", "eip", "eip:RxC", "clusdet", "clusdet:N",
    /// "clusdet_no_scalenet" and "clusdet_no_scalenet:N".
    static Strategy parse(const std::string& spec);
};

std::string to_string(EstimatorKind k);
EstimatorKind parse_estimator(const std::string& s);

struct PipelineConfig {
    PlannerParams planner;
    ProposalParams proposal;
    MergeParams merge;
    FusionParams fusion;
    EvalParams eval;
    DetectorModel detector;
    /// Scenes used to fit the offset regressor; the image seed is offset so they
    /// never coincide with evaluation scenes.
    SceneParams scale_training_scene;
    int scale_training_images = 40;
    int jobs = 1;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Initial global pass in the global frame.
ImageDetections global_pass(const ImageRecord& image, const PipelineConfig& cfg);

struct ScaleFit {
    OffsetRegressor model;
    std::vector<ScaleRecord> records;
    /// Mean smooth-L1 offset loss of the fitted model on its training clusters.
    std::optional<double> training_loss;
};

/// Fits the offset regressor on freshly simulated training scenes.
ScaleFit fit_scale_model(const Strategy& strategy, const PipelineConfig& cfg);

/// Clusters the strategy works on: proposals from the global pass reduced by ICM.
std::vector<Cluster> select_clusters(const ImageRecord& image, const ImageDetections& global, const Strategy& strategy,
                                     const PipelineConfig& cfg);

ImagePlan plan_image(const ImageRecord& image, const ImageDetections* global, const Strategy& strategy,
                     const PipelineConfig& cfg, const ScaleEstimator& estimator);

/// Raw detections of every chip, in chip-local frames, tagged with their chip id.
ImageDetections detect_image(const ImageRecord& image, const ImagePlan& plan, const DetectorModel& model);

/// Remaps raw chip detections into the global frame and fuses them.
ImageDetections fuse_image(const ImagePlan& plan, const ImageDetections& raw, const FusionParams& p);

struct StrategyRun {
    Strategy strategy;
    std::vector<ImagePlan> plans;
    std::vector<ImageDetections> raw;
    std::vector<ImageDetections> final_detections;
    std::optional<ScaleFit> scale_fit;
    EvalResult eval;
};

/// In-memory end-to-end run. `global` may be passed in to share the initial pass
/// across strategies; it is computed when absent.
StrategyRun run_strategy(const std::vector<ImageRecord>& images, const Strategy& strategy, const PipelineConfig& cfg,
                         const std::vector<ImageDetections>* global = nullptr);

std::vector<ImageDetections> global_pass_all(const std::vector<ImageRecord>& images, const PipelineConfig& cfg);

ScaleEstimator make_estimator(const Strategy& strategy, const std::optional<ScaleFit>& fit,
                              const ImageRecord& image);

}  // namespace clustile
