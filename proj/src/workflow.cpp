// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/workflow.hpp"

#include <utility>

namespace reidtrack {

namespace {

TrackerConfig tracker_config_for(const std::string& kind,
                                 const AppConfig& cfg) {
    if (kind == tracker_kind(cfg.tracker)) return cfg.tracker;
    if (kind == "centroid") return CentroidConfig{};
    if (kind == "sort") return SortConfig{};
    if (kind == "deepsort") return DeepSortConfig{};
    throw Error(Errc::bad_config, "unknown tracker '" + kind + "'");
}

std::vector<std::pair<std::string, std::string>> tracker_params(
    const TrackerConfig& tc) {
    AppConfig probe;
    probe.tracker = tc;
    std::vector<std::pair<std::string, std::string>> params;
    for (auto& [k, v] : config_echo(probe)) {
        if (k.rfind("tracker.", 0) == 0) params.emplace_back(k, v);
    }
    return params;
}

} // namespace

RbfSvmModel train_from_gallery(const std::vector<GallerySample>& gallery,
                               std::optional<double> gamma,
                               std::optional<double> c,
                               std::optional<double> min_conf) {
    TrainOptions opts;
    if (gamma) opts.gamma = *gamma;
    if (c) opts.c = *c;
    if (min_conf) opts.min_conf = *min_conf;
    return train_classifier(gallery, opts);
}

ReportDocument run_workflow(const RunConfig& rc) {
    std::vector<FrameObservations> stream;
    GroundTruth gt;
    std::vector<GallerySample> gallery;
    std::optional<ScenarioSpec> scenario_echo;

    if (rc.scenario) {
        ScenarioSpec spec = *rc.scenario;
        if (rc.seed) spec.seed = *rc.seed;
        ScenarioBundle bundle = generate(spec);
        stream = std::move(bundle.stream);
        gt = std::move(bundle.gt);
        gallery = std::move(bundle.gallery);
        scenario_echo = spec;
    } else {
        if (!rc.detections_path) {
            throw Error(Errc::bad_config,
                        "run needs a scenario or a detections file");
        }
        if (!rc.gt_path) {
            throw Error(Errc::bad_config,
                        "run needs a scenario or a ground-truth file");
        }
        stream = read_detections(*rc.detections_path);
        gt = read_ground_truth(*rc.gt_path);
        if (rc.gallery_path) gallery = read_gallery(*rc.gallery_path);
    }

    std::optional<RbfSvmModel> model;
    if (rc.reid) {
        if (rc.model_path) {
            model = read_model(*rc.model_path);
        } else if (!gallery.empty()) {
            model = train_from_gallery(gallery, std::nullopt, std::nullopt,
                                       rc.config.reid_min_conf);
        }
    }

    const auto [det_fn, det_fp] =
        count_det_errors(stream, gt, rc.config.eval_iou_min);

    std::vector<std::string> kinds = rc.trackers;
    if (kinds.empty()) kinds = {"centroid", "sort", "deepsort"};

    ReportDocument report;
    report.scenario = scenario_echo;
    {
        std::string joined;
        for (const auto& k : kinds) {
            if (!joined.empty()) joined += ",";
            joined += k;
        }
        report.config.emplace_back("run.trackers", joined);
        if (rc.detections_path) {
            report.config.emplace_back("run.detections", *rc.detections_path);
        }
        if (rc.gt_path) {
            report.config.emplace_back("run.ground_truth", *rc.gt_path);
        }
        if (rc.gallery_path) {
            report.config.emplace_back("run.gallery", *rc.gallery_path);
        }
        if (rc.model_path) {
            report.config.emplace_back("reid.model", *rc.model_path);
        }
        if (model) {
            report.config.emplace_back("reid.gamma",
                                       format_double(model->gamma));
            report.config.emplace_back("reid.c", format_double(model->c));
            report.config.emplace_back("reid.min_conf",
                                       format_double(model->min_conf));
        }
        if (rc.config.speed_limit) {
            report.config.emplace_back("reid.speed_limit",
                                       format_double(*rc.config.speed_limit));
        }
        report.config.emplace_back("eval.iou_min",
                                   format_double(rc.config.eval_iou_min));
    }

    for (const auto& kind : kinds) {
        const TrackerConfig tc = tracker_config_for(kind, rc.config);
        ResultRow row;
        row.tracker = kind;
        row.params = tracker_params(tc);
        row.det_fn = det_fn;
        row.det_fp = det_fp;

        PipelineConfig pc;
        pc.tracker = tc;
        pc.reid_min_conf = rc.config.reid_min_conf;
        pc.speed_limit = rc.config.speed_limit;

        TrackOutput plain = run_stream(stream, pc, nullptr);
        row.tracker_only = score(plain, gt, rc.config.eval_iou_min);
        if (rc.tracks_dir) {
            write_tracks(plain,
                         *rc.tracks_dir + "/" + kind + ".tracks.jsonl");
        }
        if (model) {
            TrackOutput with = run_stream(stream, pc, &*model);
            row.reider = "svm-rbf";
            row.with_reid = score(with, gt, rc.config.eval_iou_min);
            if (rc.tracks_dir) {
                write_tracks(with, *rc.tracks_dir + "/" + kind +
                                       "+reid.tracks.jsonl");
            }
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace reidtrack
