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

#include <algorithm>
#include <cmath>

#include "clustile/scale.hpp"
#include "support/gen.hpp"

using namespace clustile;

namespace {

Detection det_of_scale(double s, double x = 100, double y = 100) {
    return {Box(x, y, x + s, y + s), 1, 0.9, {}, false};
}

ScaleRecord record(double t, double t_star) {
    ScaleRecord r;
    r.p = 1.0;
    r.t = t;
    r.t_star = t_star;
    return r;
}

}  // namespace

TEST_CASE("object scale is the square root of area") {
    CHECK(object_scale(Box(0, 0, 10, 10)) == 10);
    CHECK(object_scale(Box(0, 0, 4, 9)) == 6);
    CHECK(object_scale(Box(0, 0, 1, 1)) == 1);
}

TEST_CASE("reference scale is the median") {
    CHECK(reference_scale(std::vector<Detection>{det_of_scale(50)}) == 50);
    CHECK(reference_scale(std::vector<Detection>{det_of_scale(10), det_of_scale(1000), det_of_scale(20)}) == 20);
    CHECK_THROWS_AS(reference_scale(std::vector<Detection>{}), ScaleError);
}

TEST_CASE("reference scale equals a sort-and-pick median") {
    gen::Source src(51);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Detection> d;
        std::vector<double> scales;
        const int n = trial % 2 == 0 ? 100 : 99;
        for (int i = 0; i < n; ++i) {
            const double s = src.real(1, 200);
            d.push_back(det_of_scale(s, 0, 0));
            scales.push_back(object_scale(d.back().box));
        }
        std::sort(scales.begin(), scales.end());
        const double expect = n % 2 ? scales[n / 2] : (scales[n / 2 - 1] + scales[n / 2]) / 2;
        CHECK(reference_scale(d) == expect);
    }
}

TEST_CASE("relative offset") {
    CHECK(relative_offset(100, 100) == 0);
    CHECK(relative_offset(100, 80) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(relative_offset(50, 75) == -0.5);
    CHECK_THROWS_AS(relative_offset(0, 10), ScaleError);
    CHECK_THROWS_AS(relative_offset(-1, 10), ScaleError);
}

TEST_CASE("relative offset inverts p(1 - t)") {
    gen::Source src(52);
    for (int i = 0; i < 2000; ++i) {
        const double p = std::exp(src.real(-5, 8));
        const double t = src.real(-9.99, 9.99);
        CHECK(std::abs(relative_offset(p, p * (1 - t)) - t) <= 1e-12);
    }
}

TEST_CASE("smooth L1 values") {
    CHECK(smooth_l1(0) == 0);
    CHECK(smooth_l1(0.5) == 0.125);
    CHECK(smooth_l1(2) == 1.5);
    CHECK(smooth_l1(-2) == 1.5);
}

TEST_CASE("smooth L1 is continuous with matching slopes at the kink") {
    for (double eps : {1e-3, 1e-6, 1e-9}) {
        CHECK(std::abs(smooth_l1(1 + eps) - 0.5) <= 2 * eps);
        CHECK(std::abs(smooth_l1(1 - eps) - 0.5) <= 2 * eps);
        CHECK(std::abs(smooth_l1(-1 - eps) - 0.5) <= 2 * eps);
        CHECK(std::abs(smooth_l1_derivative(1 - eps) - 1.0) <= eps * (1 + 1e-6));
        CHECK(std::abs(smooth_l1_derivative(-1 + eps) + 1.0) <= eps * (1 + 1e-6));
    }
    CHECK(smooth_l1_derivative(1.5) == 1.0);
    CHECK(smooth_l1_derivative(-1.5) == -1.0);
}

TEST_CASE("scale loss examples") {
    std::vector<ScaleRecord> zero{record(0.3, 0.3), record(-1.2, -1.2)};
    CHECK(scale_loss(zero) == 0);
    std::vector<ScaleRecord> one{record(0.3, 0.1)};
    CHECK(scale_loss(one) == doctest::Approx(0.02).epsilon(1e-12));
    std::vector<ScaleRecord> missing{record(0.3, 0.1)};
    missing[0].t_star.reset();
    CHECK_THROWS_AS(scale_loss(missing), ScaleError);
    CHECK_THROWS_AS(scale_loss(std::vector<ScaleRecord>{}), ScaleError);
}

TEST_CASE("scale loss equals independent summation") {
    gen::Source src(53);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ScaleRecord> recs;
        long double sum = 0;
        for (int i = 0; i < 50; ++i) {
            recs.push_back(record(src.real(-3, 3), src.real(-3, 3)));
            const long double x = static_cast<long double>(recs.back().t) - *recs.back().t_star;
            sum += std::fabs(x) < 1 ? 0.5L * x * x : std::fabs(x) - 0.5L;
        }
        CHECK(std::abs(scale_loss(recs) - static_cast<double>(sum / 50)) <= 1e-12);
    }
}

TEST_CASE("gradient matches central finite differences") {
    gen::Source src(54);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ScaleRecord> recs;
        for (int i = 0; i < 5; ++i) recs.push_back(record(src.real(-3, 3), src.real(-3, 3)));
        const std::size_t k = static_cast<std::size_t>(src.integer(0, 4));
        if (trial % 4 == 0) {
            // straddle the kink
            recs[k].t = *recs[k].t_star + (src.coin() ? 1.0 : -1.0) + src.real(-0.01, 0.01);
        }
        const double x = recs[k].t - *recs[k].t_star;
        if (std::abs(std::abs(x) - 1.0) < 1e-4) continue;
        const double h = 1e-6;
        auto plus = recs, minus = recs;
        plus[k].t += h;
        minus[k].t -= h;
        const double fd = (scale_loss(plus) - scale_loss(minus)) / (2 * h);
        const double g = scale_loss_gradient(recs)[k];
        CHECK(std::abs(g - fd) / std::max(std::abs(g), 1e-8) < 1e-6);
        ++checked;
    }
    CHECK(checked > 90);
}

TEST_CASE("ScaleRecord::make keeps t consistent") {
    const auto r = ScaleRecord::make(3, 40, 30, 35.0);
    CHECK(r.t == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(*r.t_star == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(std::abs(r.t - (r.p - r.s_hat) / r.p) <= 1e-12);
}

TEST_CASE("estimators") {
    const ImageExtent e(1000, 1000);
    const Cluster c{Box(0, 0, 500, 500), 1.0, 3};
    const std::vector<Detection> dets{det_of_scale(40, 10, 10), det_of_scale(40, 100, 100), det_of_scale(40, 200, 200)};
    CHECK(estimate_scale(c, dets, PassThroughEstimator{}, e) == 40);

    OracleEstimator oracle;
    for (int i = 0; i < 3; ++i) oracle.annotations.push_back({Box(50.0 * i, 0, 50.0 * i + 30, 30), 1, i + 1});
    CHECK(estimate_scale(c, {}, oracle, e) == 30);

    CHECK_THROWS_AS(estimate_scale(c, {}, PassThroughEstimator{}, e), ScaleError);
    CHECK_THROWS_AS(estimate_scale(Cluster{Box(600, 600, 700, 700), 1.0, 0}, {}, oracle, e), ScaleError);

    const OffsetRegressorEstimator shrink{OffsetRegressor(0.25, 0, 0)};
    CHECK(estimate_scale(c, dets, shrink, e) == doctest::Approx(30));
}

TEST_CASE("offset regressor fitted on zero targets predicts near zero") {
    gen::Source src(55);
    std::vector<OffsetRegressor::Sample> samples;
    for (int i = 0; i < 200; ++i) {
        samples.push_back({{std::log(src.real(3, 40)), std::log(src.real(0.001, 0.2))}, 0.0});
    }
    const auto m = OffsetRegressor::fit(samples);
    for (int i = 0; i < 200; ++i) {
        CHECK(std::abs(m.predict({std::log(src.real(3, 40)), std::log(src.real(0.001, 0.2))})) < 0.05);
    }
}

TEST_CASE("offset regressor recovers a linear relation") {
    gen::Source src(56);
    std::vector<OffsetRegressor::Sample> samples;
    for (int i = 0; i < 100; ++i) {
        const ScaleFeatures f{src.real(0, 4), src.real(-7, -1)};
        samples.push_back({f, 0.1 - 0.2 * f.log_member_count + 0.05 * f.log_area_fraction});
    }
    const auto m = OffsetRegressor::fit(samples);
    CHECK(m.intercept() == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(m.w_members() == doctest::Approx(-0.2).epsilon(1e-9));
    CHECK(m.w_area() == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("singular designs fall back without blowing up") {
    std::vector<OffsetRegressor::Sample> same(10, {{1.0, -2.0}, 0.3});
    const auto m = OffsetRegressor::fit(same);
    CHECK(m.predict({1.0, -2.0}) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(OffsetRegressor::fit({}) == OffsetRegressor());
}

TEST_CASE("scale sample needs detections and ground truth") {
    const ImageExtent e(1000, 1000);
    const Cluster c{Box(0, 0, 300, 300), 1.0, 0};
    const std::vector<Detection> dets{det_of_scale(40, 10, 10)};
    const std::vector<Annotation> gts{{Box(10, 10, 40, 40), 1, 1}};
    CHECK_FALSE(scale_sample(c, {}, gts, e).has_value());
    CHECK_FALSE(scale_sample(c, dets, {}, e).has_value());
    const auto s = scale_sample(c, dets, gts, e);
    REQUIRE(s.has_value());
    CHECK(s->t_star == doctest::Approx(0.25));
}
