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

#include "clustile/cli/config.hpp"

#include <set>
#include <utility>

namespace clustile::cli {

using nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& key, const std::string& what)
    : std::runtime_error(key + ": " + what), key_(key) {}

namespace {

ordered_json range_json(const IntRange& r) { return ordered_json::array({r.lo, r.hi}); }

ordered_json kumaraswamy_json(const KumaraswamyParams& k) { return {{"a", k.a}, {"b", k.b}}; }

std::string score_mode_name(ProposalScoreMode m) {
    return m == ProposalScoreMode::mean_member_score ? "mean_member_score" : "count_normalized";
}

std::string overlap_name(OverlapMeasure m) {
    return m == OverlapMeasure::iou ? "iou" : "intersection_over_min";
}

/// Reads one JSON object and remembers which keys were consumed, so that
/// leftovers can be reported as unknown.
class Reader {
public:
    Reader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    std::string key(const char* k) const { return path_.empty() ? std::string(k) : path_ + "." + k; }

    bool has(const char* k) const { return j_.contains(k); }

    const ordered_json& raw(const char* k) {
        seen_.insert(k);
        return j_.at(k);
    }

    template <class T>
    void get(const char* k, T& out) {
        if (!j_.contains(k)) {
            return;
        }
        seen_.insert(k);
        const auto& v = j_.at(k);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ConfigError(key(k), "expected true or false");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw ConfigError(key(k), "expected an integer");
            }
            if constexpr (std::is_unsigned_v<T>) {
                if (!v.is_number_unsigned() && v.get<long long>() < 0) {
                    throw ConfigError(key(k), "expected a non-negative integer");
                }
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError(key(k), "expected a number");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError(key(k), "expected a string");
            }
        }
        try {
            out = v.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(key(k), "has the wrong type");
        }
    }

    void get_range(const char* k, IntRange& out) {
        if (!j_.contains(k)) {
            return;
        }
        const auto& v = raw(k);
        if (v.is_number_integer()) {
            out = {v.get<int>(), v.get<int>()};
            return;
        }
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
            throw ConfigError(key(k), "expected an integer or [lo, hi]");
        }
        out = {v[0].get<int>(), v[1].get<int>()};
    }

    void get_kumaraswamy(const char* k, KumaraswamyParams& out) {
        if (!j_.contains(k)) {
            return;
        }
        Reader r(raw(k), key(k));
        r.get("a", out.a);
        r.get("b", out.b);
        r.finish();
    }

    Reader child(const char* k) {
        static const ordered_json empty = ordered_json::object();
        if (!j_.contains(k)) {
            return Reader(empty, key(k));
        }
        return Reader(raw(k), key(k));
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError(path_.empty() ? item.key() : path_ + "." + item.key(), "unknown key");
            }
        }
    }

private:
    const ordered_json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

/// Re-raises a parameter validation failure under its config section.
template <class T>
void validate_section(const T& params, const std::string& section) {
    try {
        validate(params);
    } catch (const ValidationError& e) {
        throw ConfigError(section + "." + e.field(), e.what());
    }
}

}  // namespace

ordered_json default_config() {
    const SceneParams scene;
    const DetectorModel det;
    const PlannerParams planner;
    const ProposalParams proposal;
    const MergeParams merge;
    const FusionParams fusion;
    const EvalParams eval;
    const PipelineConfig pipeline;
    const ReportSettings report;

    ordered_json recall = ordered_json::array();
    for (const auto& [s, r] : det.recall_curve) {
        recall.push_back({s, r});
    }

    ordered_json c;
    c["seed"] = 1;
    c["out"] = "out";
    c["dataset"] = nullptr;
    c["images"] = 100;
    c["jobs"] = pipeline.jobs;
    c["strategy"] = "clusdet";
    c["topn"] = 3;
    c["eip"] = {{"rows", 2}, {"cols", 3}, {"overlap", 0.0}};
    c["compare"] = {{"strategies", {"global_only", "eip", "clusdet_no_scalenet", "clusdet"}},
                    {"topn_sweep", {1, 2, 3, 4, 5, 6, 7, 8}}};
    c["scene"] = {{"width", scene.width},
                  {"height", scene.height},
                  {"n_clusters", range_json(scene.n_clusters)},
                  {"objects_per_cluster", range_json(scene.objects_per_cluster)},
                  {"cluster_spread", scene.cluster_spread},
                  {"background_objects", range_json(scene.background_objects)},
                  {"object_scale", {{"median", scene.object_scale.median}, {"sigma", scene.object_scale.sigma}}},
                  {"cluster_scale_sigma", scene.cluster_scale_sigma},
                  {"aspect_sigma", scene.aspect_sigma},
                  {"categories", scene.categories}};
    c["detector"] = {{"recall_curve", recall},
                     {"loc_noise_frac", det.loc_noise_frac},
                     {"score", kumaraswamy_json(det.score)},
                     {"fp_rate", det.fp_rate},
                     {"fp_score", kumaraswamy_json(det.fp_score)},
                     {"fp_min_side", det.fp_min_side},
                     {"fp_max_side", det.fp_max_side},
                     {"categories", det.categories},
                     {"truncation_threshold", det.truncation_threshold},
                     {"fragment_fp", det.fragment_fp}};
    c["planner"] = {{"detector_input", planner.detector_input},
                    {"scale_lo", planner.scale_lo},
                    {"scale_hi", planner.scale_hi},
                    {"max_partition_depth", planner.max_partition_depth},
                    {"min_chip_side", planner.min_chip_side}};
    c["proposal"] = {{"merge_gap", proposal.merge_gap},
                     {"min_members", proposal.min_members},
                     {"margin", proposal.margin},
                     {"score_mode", score_mode_name(proposal.score_mode)}};
    c["merge"] = {{"tau_op", merge.tau_op}, {"max_icm_rounds", merge.max_icm_rounds},
                  {"overlap", overlap_name(merge.overlap)}};
    c["fusion"] = {{"nms_iou", fusion.nms_iou},
                   {"max_final", fusion.max_final},
                   {"suppress_global_in_clusters", fusion.suppress_global_in_clusters},
                   {"center_rule", fusion.center_rule}};
    c["eval"] = {{"iou_thresholds", eval.iou_thresholds},
                 {"small_max_area", eval.small_max_area},
                 {"medium_max_area", eval.medium_max_area},
                 {"max_dets", eval.max_dets}};
    c["scale_model"] = {{"estimator", to_string(EstimatorKind::offset_regressor)},
                        {"training_images", pipeline.scale_training_images}};
    c["report"] = {{"strategy", "clusdet"},
                   {"grid", {{"rows", report.grid_rows}, {"cols", report.grid_cols}}},
                   {"sparse_max", report.chip_types.sparse_max},
                   {"common_max", report.chip_types.common_max}};
    return c;
}

void merge_config(ordered_json& base, const ordered_json& patch) { base.merge_patch(patch); }

void set_dotted(ordered_json& config, const std::string& key, const std::string& value) {
    if (key.empty()) {
        throw ConfigError("<override>", "empty key");
    }
    ordered_json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ConfigError(key, "malformed dotted key");
        }
        if (!node->is_object()) {
            throw ConfigError(key, "\"" + part + "\" is not inside an object");
        }
        if (dot == std::string::npos) {
            ordered_json parsed = ordered_json::parse(value, nullptr, false);
            (*node)[part] = parsed.is_discarded() ? ordered_json(value) : std::move(parsed);
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

void apply_assignment(ordered_json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError(assignment, "override must look like key=value");
    }
    set_dotted(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

Strategy resolve_strategy(const std::string& spec, const ordered_json& config) {
    Strategy s;
    try {
        s = Strategy::parse(spec);
    } catch (const ValidationError& e) {
        throw ConfigError("strategy", e.what());
    }
    if (spec.find(':') == std::string::npos) {
        if (config.contains("topn") && config["topn"].is_number_integer()) {
            s.topn = config["topn"].get<int>();
        }
        if (config.contains("eip") && config["eip"].is_object()) {
            const auto& eip = config["eip"];
            if (eip.contains("rows") && eip["rows"].is_number_integer()) {
                s.rows = eip["rows"].get<int>();
            }
            if (eip.contains("cols") && eip["cols"].is_number_integer()) {
                s.cols = eip["cols"].get<int>();
            }
        }
    }
    if (config.contains("eip") && config["eip"].is_object() && config["eip"].contains("overlap") &&
        config["eip"]["overlap"].is_number()) {
        s.overlap = config["eip"]["overlap"].get<double>();
    }
    return s;
}

RunConfig to_run_config(const ordered_json& config) {
    RunConfig rc;
    PipelineConfig& pc = rc.pipeline;
    Reader root(config, "");

    root.get("seed", rc.seed);
    std::string out = rc.out.string();
    root.get("out", out);
    if (out.empty()) {
        throw ConfigError("out", "must not be empty");
    }
    rc.out = out;
    if (root.has("dataset")) {
        const auto& d = root.raw("dataset");
        if (d.is_string()) {
            rc.dataset = d.get<std::string>();
        } else if (!d.is_null()) {
            throw ConfigError("dataset", "expected a path or null");
        }
    }
    root.get("images", rc.images);
    if (rc.images < 1) {
        throw ConfigError("images", "must be >= 1");
    }
    root.get("jobs", pc.jobs);
    if (pc.jobs < 1) {
        throw ConfigError("jobs", "must be >= 1");
    }

    int topn = 3;
    root.get("topn", topn);
    if (topn < 1) {
        throw ConfigError("topn", "must be >= 1");
    }
    {
        Reader eip = root.child("eip");
        int rows = 2;
        int cols = 3;
        double overlap = 0.0;
        eip.get("rows", rows);
        eip.get("cols", cols);
        eip.get("overlap", overlap);
        eip.finish();
        if (rows < 1 || cols < 1) {
            throw ConfigError("eip", "rows and cols must be >= 1");
        }
        if (overlap < 0.0) {
            throw ConfigError("eip.overlap", "must be >= 0");
        }
    }

    {
        Reader s = root.child("scene");
        SceneParams& sp = rc.scene;
        s.get("width", sp.width);
        s.get("height", sp.height);
        s.get_range("n_clusters", sp.n_clusters);
        s.get_range("objects_per_cluster", sp.objects_per_cluster);
        s.get("cluster_spread", sp.cluster_spread);
        s.get_range("background_objects", sp.background_objects);
        if (s.has("object_scale")) {
            Reader os = s.child("object_scale");
            os.get("median", sp.object_scale.median);
            os.get("sigma", sp.object_scale.sigma);
            os.finish();
        }
        s.get("cluster_scale_sigma", sp.cluster_scale_sigma);
        s.get("aspect_sigma", sp.aspect_sigma);
        s.get("categories", sp.categories);
        s.finish();
        sp.seed = rc.seed;
        validate_section(sp, "scene");
    }

    {
        Reader d = root.child("detector");
        DetectorModel& m = pc.detector;
        if (d.has("recall_curve")) {
            const auto& curve = d.raw("recall_curve");
            if (!curve.is_array() || curve.empty()) {
                throw ConfigError("detector.recall_curve", "expected a non-empty list of [scale, recall] pairs");
            }
            m.recall_curve.clear();
            for (const auto& pt : curve) {
                if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
                    throw ConfigError("detector.recall_curve", "expected [scale, recall] pairs");
                }
                m.recall_curve.emplace_back(pt[0].get<double>(), pt[1].get<double>());
            }
        }
        d.get("loc_noise_frac", m.loc_noise_frac);
        d.get_kumaraswamy("score", m.score);
        d.get("fp_rate", m.fp_rate);
        d.get_kumaraswamy("fp_score", m.fp_score);
        d.get("fp_min_side", m.fp_min_side);
        d.get("fp_max_side", m.fp_max_side);
        d.get("categories", m.categories);
        d.get("truncation_threshold", m.truncation_threshold);
        d.get("fragment_fp", m.fragment_fp);
        d.finish();
        m.seed = rc.seed;
        validate_section(m, "detector");
    }

    {
        Reader p = root.child("planner");
        p.get("detector_input", pc.planner.detector_input);
        p.get("scale_lo", pc.planner.scale_lo);
        p.get("scale_hi", pc.planner.scale_hi);
        p.get("max_partition_depth", pc.planner.max_partition_depth);
        p.get("min_chip_side", pc.planner.min_chip_side);
        p.finish();
        validate_section(pc.planner, "planner");
    }

    {
        Reader p = root.child("proposal");
        p.get("merge_gap", pc.proposal.merge_gap);
        p.get("min_members", pc.proposal.min_members);
        p.get("margin", pc.proposal.margin);
        std::string mode = score_mode_name(pc.proposal.score_mode);
        p.get("score_mode", mode);
        if (mode == "mean_member_score") {
            pc.proposal.score_mode = ProposalScoreMode::mean_member_score;
        } else if (mode == "count_normalized") {
            pc.proposal.score_mode = ProposalScoreMode::count_normalized;
        } else {
            throw ConfigError("proposal.score_mode",
                              "unknown mode \"" + mode + "\" (expected mean_member_score or count_normalized)");
        }
        p.finish();
        if (pc.proposal.merge_gap < 0.0 || pc.proposal.margin < 0.0) {
            throw ConfigError("proposal", "merge_gap and margin must be >= 0");
        }
        if (pc.proposal.min_members < 1) {
            throw ConfigError("proposal.min_members", "must be >= 1");
        }
    }

    {
        Reader p = root.child("merge");
        p.get("tau_op", pc.merge.tau_op);
        p.get("max_icm_rounds", pc.merge.max_icm_rounds);
        std::string measure = overlap_name(pc.merge.overlap);
        p.get("overlap", measure);
        if (measure == "iou") {
            pc.merge.overlap = OverlapMeasure::iou;
        } else if (measure == "intersection_over_min") {
            pc.merge.overlap = OverlapMeasure::intersection_over_min;
        } else {
            throw ConfigError("merge.overlap",
                              "unknown measure \"" + measure + "\" (expected iou or intersection_over_min)");
        }
        p.finish();
        validate_section(pc.merge, "merge");
    }

    {
        Reader p = root.child("fusion");
        p.get("nms_iou", pc.fusion.nms_iou);
        p.get("max_final", pc.fusion.max_final);
        p.get("suppress_global_in_clusters", pc.fusion.suppress_global_in_clusters);
        p.get("center_rule", pc.fusion.center_rule);
        p.finish();
        validate_section(pc.fusion, "fusion");
    }

    {
        Reader p = root.child("eval");
        p.get("iou_thresholds", pc.eval.iou_thresholds);
        p.get("small_max_area", pc.eval.small_max_area);
        p.get("medium_max_area", pc.eval.medium_max_area);
        p.get("max_dets", pc.eval.max_dets);
        p.finish();
        validate_section(pc.eval, "eval");
    }

    EstimatorKind estimator = EstimatorKind::offset_regressor;
    {
        Reader p = root.child("scale_model");
        std::string name = to_string(estimator);
        p.get("estimator", name);
        try {
            estimator = parse_estimator(name);
        } catch (const ValidationError& e) {
            throw ConfigError("scale_model.estimator", e.what());
        }
        p.get("training_images", pc.scale_training_images);
        p.finish();
        if (pc.scale_training_images < 1) {
            throw ConfigError("scale_model.training_images", "must be >= 1");
        }
        pc.scale_training_scene = rc.scene;
    }

    const auto finish_strategy = [&](Strategy s) {
        s.tau_op = pc.merge.tau_op;
        s.scale_lo = pc.planner.scale_lo;
        s.scale_hi = pc.planner.scale_hi;
        s.depth = pc.planner.max_partition_depth;
        s.estimator = estimator;
        if (s.topn < 1) {
            throw ConfigError("strategy", "TopN must be >= 1");
        }
        if (s.rows < 1 || s.cols < 1) {
            throw ConfigError("strategy", "eip grid must be at least 1x1");
        }
        return s;
    };

    std::string strategy = "clusdet";
    root.get("strategy", strategy);
    rc.strategy = finish_strategy(resolve_strategy(strategy, config));

    {
        Reader p = root.child("compare");
        if (p.has("strategies")) {
            const auto& list = p.raw("strategies");
            if (!list.is_array() || list.empty()) {
                throw ConfigError("compare.strategies", "expected a non-empty list of strategy names");
            }
            for (const auto& item : list) {
                if (!item.is_string()) {
                    throw ConfigError("compare.strategies", "expected strategy names");
                }
                rc.compare.push_back(finish_strategy(resolve_strategy(item.get<std::string>(), config)));
            }
        }
        p.get("topn_sweep", rc.topn_sweep);
        p.finish();
        for (int n : rc.topn_sweep) {
            if (n < 1) {
                throw ConfigError("compare.topn_sweep", "TopN values must be >= 1");
            }
        }
    }

    {
        Reader p = root.child("report");
        std::string report_strategy = "clusdet";
        p.get("strategy", report_strategy);
        {
            Reader g = p.child("grid");
            g.get("rows", rc.report.grid_rows);
            g.get("cols", rc.report.grid_cols);
            g.finish();
        }
        p.get("sparse_max", rc.report.chip_types.sparse_max);
        p.get("common_max", rc.report.chip_types.common_max);
        p.finish();
        if (rc.report.grid_rows < 1 || rc.report.grid_cols < 1) {
            throw ConfigError("report.grid", "rows and cols must be >= 1");
        }
        validate_section(rc.report.chip_types, "report");
        rc.report.strategy = finish_strategy(resolve_strategy(report_strategy, config));
        if (!rc.report.strategy.uses_clusters()) {
            throw ConfigError("report.strategy", "must be a cluster-based strategy");
        }
    }

    root.finish();
    rc.source = config;
    return rc;
}

}  // namespace clustile::cli
