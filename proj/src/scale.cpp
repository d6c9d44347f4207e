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

#include "clustile/scale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace clustile {

ScaleRecord ScaleRecord::make(int cluster_id, double p, double s_hat, std::optional<double> s_star) {
    ScaleRecord r;
    r.cluster_id = cluster_id;
    r.p = p;
    r.s_hat = s_hat;
    r.t = relative_offset(p, s_hat);
    r.s_star = s_star;
    if (s_star) {
        r.t_star = relative_offset(p, *s_star);
    }
    return r;
}

double object_scale(const Box& b) noexcept { return std::sqrt(area(b)); }

double reference_scale(std::span<const Detection> detections_in_cluster) {
    if (detections_in_cluster.empty()) {
        throw ScaleError("reference scale needs at least one detection");
    }
    std::vector<double> scales;
    scales.reserve(detections_in_cluster.size());
    for (const auto& d : detections_in_cluster) {
        scales.push_back(object_scale(d.box));
    }
    std::sort(scales.begin(), scales.end());
    const std::size_t n = scales.size();
    if (n % 2 == 1) {
        return scales[n / 2];
    }
    return 0.5 * (scales[n / 2 - 1] + scales[n / 2]);
}

double relative_offset(double p, double s) {
    if (!(p > 0.0)) {
        throw ScaleError("reference scale must be positive, got " + std::to_string(p));
    }
    return (p - s) / p;
}

double smooth_l1(double x) noexcept {
    const double ax = std::abs(x);
    return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double smooth_l1_derivative(double x) noexcept {
    if (std::abs(x) < 1.0) {
        return x;
    }
    return x > 0.0 ? 1.0 : -1.0;
}

double scale_loss(std::span<const ScaleRecord> records) {
    if (records.empty()) {
        throw ScaleError("scale loss over an empty batch");
    }
    double sum = 0.0;
    for (const auto& r : records) {
        if (!r.t_star) {
            throw ScaleError("cluster " + std::to_string(r.cluster_id) + " has no target offset");
        }
        sum += smooth_l1(r.t - *r.t_star);
    }
    return sum / static_cast<double>(records.size());
}

std::vector<double> scale_loss_gradient(std::span<const ScaleRecord> records) {
    if (records.empty()) {
        throw ScaleError("scale loss over an empty batch");
    }
    const double inv_m = 1.0 / static_cast<double>(records.size());
    std::vector<double> grad;
    grad.reserve(records.size());
    for (const auto& r : records) {
        if (!r.t_star) {
            throw ScaleError("cluster " + std::to_string(r.cluster_id) + " has no target offset");
        }
        grad.push_back(smooth_l1_derivative(r.t - *r.t_star) * inv_m);
    }
    return grad;
}

std::vector<Detection> detections_in(const Cluster& cluster, std::span<const Detection> dets) {
    std::vector<Detection> inside;
    for (const auto& d : dets) {
        if (center_inside(cluster.box, d.box)) {
            inside.push_back(d);
        }
    }
    return inside;
}

std::vector<Annotation> annotations_in(const Cluster& cluster, std::span<const Annotation> annotations) {
    std::vector<Annotation> inside;
    for (const auto& a : annotations) {
        if (center_inside(cluster.box, a.box)) {
            inside.push_back(a);
        }
    }
    return inside;
}

ScaleFeatures scale_features(const Cluster& cluster, std::size_t detections_inside, const ImageExtent& extent) {
    const double n = static_cast<double>(std::max<std::size_t>(detections_inside, 1));
    const double image_area = static_cast<double>(extent.width) * static_cast<double>(extent.height);
    return {std::log(n), std::log(area(cluster.box) / image_area)};
}

OffsetRegressor OffsetRegressor::fit(std::span<const Sample> samples) {
    if (samples.empty()) {
        return {};
    }
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        x(i, 1) = s.features.log_member_count;
        x(i, 2) = s.features.log_area_fraction;
        y(i) = s.t_star;
    }
    Eigen::Matrix3d normal = x.transpose() * x;
    const Eigen::Vector3d rhs = x.transpose() * y;
    Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
        normal += 1e-8 * Eigen::Matrix3d::Identity();
        ldlt.compute(normal);
    }
    const Eigen::Vector3d w = ldlt.solve(rhs);
    return {w(0), w(1), w(2)};
}

double OffsetRegressor::predict(const ScaleFeatures& f) const noexcept {
    return intercept_ + w_members_ * f.log_member_count + w_area_ * f.log_area_fraction;
}

double estimate_scale(const Cluster& cluster, std::span<const Detection> global_dets, const ScaleEstimator& estimator,
                      const ImageExtent& extent) {
    if (const auto* oracle = std::get_if<OracleEstimator>(&estimator)) {
        const auto members = annotations_in(cluster, oracle->annotations);
        if (members.empty()) {
            throw ScaleError("oracle estimator: cluster holds no ground-truth objects");
        }
        double sum = 0.0;
        for (const auto& a : members) {
            sum += object_scale(a.box);
        }
        return sum / static_cast<double>(members.size());
    }

    const auto members = detections_in(cluster, global_dets);
    if (members.empty()) {
        throw ScaleError("cluster holds no initial detections");
    }
    const double p = reference_scale(members);
    if (std::holds_alternative<PassThroughEstimator>(estimator)) {
        return p;
    }
    const auto& model = std::get<OffsetRegressorEstimator>(estimator).model;
    const double t_hat = model.predict(scale_features(cluster, members.size(), extent));
    // keep the estimate positive however far the linear model extrapolates
    return p * std::max(1.0 - t_hat, 0.05);
}

std::optional<OffsetRegressor::Sample> scale_sample(const Cluster& cluster, std::span<const Detection> global_dets,
                                                    std::span<const Annotation> annotations,
                                                    const ImageExtent& extent) {
    const auto dets = detections_in(cluster, global_dets);
    const auto gts = annotations_in(cluster, annotations);
    if (dets.empty() || gts.empty()) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (const auto& a : gts) {
        sum += object_scale(a.box);
    }
    const double s_star = sum / static_cast<double>(gts.size());
    const double p = reference_scale(dets);
    return OffsetRegressor::Sample{scale_features(cluster, dets.size(), extent), relative_offset(p, s_star)};
}

}  // namespace clustile
