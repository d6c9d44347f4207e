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
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "clustile/records.hpp"

namespace clustile {

class ScaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-cluster scale bookkeeping. `p` is the reference scale of the detected
/// objects, `s_star` the mean ground-truth scale, `s_hat` the estimate, and
/// t / t_star the relative offsets (p - s) / p.
struct ScaleRecord {
    int cluster_id = 0;
    double p = 0.0;
    std::optional<double> s_star;
    double s_hat = 0.0;
    double t = 0.0;
    std::optional<double> t_star;

    static ScaleRecord make(int cluster_id, double p, double s_hat, std::optional<double> s_star = std::nullopt);
};

/// sqrt(area): a length, comparable to the planner's scale range.
double object_scale(const Box& b) noexcept;

/// Median object scale of the detections; throws ScaleError on an empty list.
double reference_scale(std::span<const Detection> detections_in_cluster);

double relative_offset(double p, double s);

double smooth_l1(double x) noexcept;
double smooth_l1_derivative(double x) noexcept;

/// Mean smooth-L1 residual over the records; every record must carry t_star.
double scale_loss(std::span<const ScaleRecord> records);
/// d(scale_loss)/d(t_i) for each record.
std::vector<double> scale_loss_gradient(std::span<const ScaleRecord> records);

/// Detections whose box center lies inside the cluster box.
std::vector<Detection> detections_in(const Cluster& cluster, std::span<const Detection> dets);
std::vector<Annotation> annotations_in(const Cluster& cluster, std::span<const Annotation> annotations);

struct ScaleFeatures {
    double log_member_count = 0.0;
    double log_area_fraction = 0.0;
};

ScaleFeatures scale_features(const Cluster& cluster, std::size_t detections_inside, const ImageExtent& extent);

/// Linear model t_hat = intercept + w_members * log(n) + w_area * log(area / image area),
/// fitted in closed form.
class OffsetRegressor {
public:
    struct Sample {
        ScaleFeatures features;
        double t_star = 0.0;
    };

    OffsetRegressor() = default;
    OffsetRegressor(double intercept, double w_members, double w_area)
        : intercept_(intercept), w_members_(w_members), w_area_(w_area) {}

    /// Ordinary least squares; falls back to a tiny ridge term when the design is singular.
    static OffsetRegressor fit(std::span<const Sample> samples);

    double predict(const ScaleFeatures& f) const noexcept;

    double intercept() const noexcept { return intercept_; }
    double w_members() const noexcept { return w_members_; }
    double w_area() const noexcept { return w_area_; }

    bool operator==(const OffsetRegressor&) const = default;

private:
    double intercept_ = 0.0;
    double w_members_ = 0.0;
    double w_area_ = 0.0;
};

struct PassThroughEstimator {};

struct OffsetRegressorEstimator {
    OffsetRegressor model;
};

/// Test-only: reads the answer from the ground truth.
struct OracleEstimator {
    std::vector<Annotation> annotations;
};

using ScaleEstimator = std::variant<PassThroughEstimator, OffsetRegressorEstimator, OracleEstimator>;

double estimate_scale(const Cluster& cluster, std::span<const Detection> global_dets, const ScaleEstimator& estimator,
                      const ImageExtent& extent);

/// Builds the training sample for one cluster, or nothing when the cluster holds
/// no detections or no ground-truth objects.
std::optional<OffsetRegressor::Sample> scale_sample(const Cluster& cluster, std::span<const Detection> global_dets,
                                                    std::span<const Annotation> annotations,
                                                    const ImageExtent& extent);

}  // namespace clustile
