// SPDX-License-Identifier: Apache-2.0
#include "reidtrack.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "reidtrack/formats.hpp"
#include "reidtrack/workflow.hpp"

using namespace reidtrack;
using ordered_json = nlohmann::ordered_json;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// All exported functions funnel through here so the exception-to-status
// mapping lives in exactly one place.
template <typename Fn>
rt_status guarded(Fn&& fn) {
    try {
        fn();
        return RT_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return e.is_usage() ? RT_USAGE_ERROR : RT_DATA_ERROR;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RT_INTERNAL_ERROR;
    } catch (...) {
        g_last_error = "unknown error";
        return RT_INTERNAL_ERROR;
    }
}

rt_status require(bool ok, const char* what) {
    if (ok) return RT_OK;
    g_last_error = std::string("null argument: ") + what;
    return RT_USAGE_ERROR;
}

ordered_json identity_obj(const Identity& id) {
    if (id.is_known()) return id.label();
    return nullptr;
}

} // namespace

struct rt_model {
    RbfSvmModel impl;
};

struct rt_pipeline {
    explicit rt_pipeline(const PipelineConfig& cfg, const RbfSvmModel* model)
        : impl(cfg, model) {}
    Pipeline impl;
};

extern "C" {

const char* rt_last_error(void) { return g_last_error.c_str(); }

void rt_string_free(char* s) { std::free(s); }

int rt_format_version(void) { return 1; }

rt_status rt_model_train(const char* gallery_path, double gamma, double c,
                         double min_conf, rt_model** out) {
    if (rt_status s = require(gallery_path && out, "gallery_path/out")) {
        return s;
    }
    return guarded([&] {
        const auto gallery = read_gallery(gallery_path);
        TrainOptions opts;
        if (gamma > 0) opts.gamma = gamma;
        if (c > 0) opts.c = c;
        if (min_conf >= 0) opts.min_conf = min_conf;
        *out = new rt_model{train_classifier(gallery, opts)};
    });
}

rt_status rt_model_load(const char* path, rt_model** out) {
    if (rt_status s = require(path && out, "path/out")) return s;
    return guarded([&] { *out = new rt_model{read_model(path)}; });
}

rt_status rt_model_save(const rt_model* model, const char* path) {
    if (rt_status s = require(model && path, "model/path")) return s;
    return guarded([&] { write_model(model->impl, path); });
}

rt_status rt_model_classify_json(const rt_model* model,
                                 const char* embedding_json, char** out_json) {
    if (rt_status s =
            require(model && embedding_json && out_json, "model/json/out")) {
        return s;
    }
    return guarded([&] {
        Embedding e;
        try {
            const auto j = ordered_json::parse(embedding_json);
            if (!j.is_array()) {
                throw Error(Errc::parse_error,
                            "embedding must be a JSON array");
            }
            e = j.get<Embedding>();
        } catch (const ordered_json::exception& ex) {
            throw Error(Errc::parse_error,
                        std::string("embedding: ") + ex.what());
        }
        const Prediction p = classify(model->impl, e);
        ordered_json j;
        j["label"] = identity_obj(p.identity);
        j["confidence"] = p.confidence;
        auto& rj = j["ranking"] = ordered_json::array();
        for (const auto& [label, conf] : ranked_classify(model->impl, e)) {
            rj.push_back(ordered_json::array({label, conf}));
        }
        *out_json = dup_string(j.dump());
    });
}

void rt_model_free(rt_model* model) { delete model; }

rt_status rt_pipeline_create(const char* config_text, const rt_model* model,
                             rt_pipeline** out) {
    if (rt_status s = require(out != nullptr, "out")) return s;
    return guarded([&] {
        const AppConfig cfg =
            parse_config(config_text ? config_text : "");
        *out = new rt_pipeline(to_pipeline_config(cfg),
                               model ? &model->impl : nullptr);
    });
}

rt_status rt_pipeline_process_json(rt_pipeline* pipeline,
                                   const char* frame_json, char** out_json) {
    if (rt_status s = require(pipeline && frame_json && out_json,
                              "pipeline/frame/out")) {
        return s;
    }
    return guarded([&] {
        const FrameObservations obs = detections_line_parse(frame_json);
        const std::size_t events_before = pipeline->impl.output().events.size();
        const FrameOutput frame = pipeline->impl.process_frame(obs);

        ordered_json j;
        j["frame"] = frame.frame;
        auto& entries = j["entries"] = ordered_json::array();
        for (const auto& e : frame.entries) {
            ordered_json ej;
            ej["track"] = e.track_id;
            ej["label"] = identity_obj(e.identity);
            ej["box"] =
                ordered_json::array({e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h});
            entries.push_back(std::move(ej));
        }
        auto& events = j["events"] = ordered_json::array();
        const auto& all = pipeline->impl.output().events;
        for (std::size_t i = events_before; i < all.size(); ++i) {
            const auto& ev = all[i];
            ordered_json evj;
            evj["rule"] = reid_rule_name(ev.rule);
            evj["affected"] = ev.affected;
            auto& outcomes = evj["outcomes"] = ordered_json::array();
            for (const auto& o : ev.outcomes) {
                ordered_json oj;
                oj["track"] = o.track_id;
                oj["old"] = identity_obj(o.old_identity);
                oj["new"] = identity_obj(o.new_identity);
                oj["conf"] = o.confidence;
                oj["classified"] = o.classified;
                outcomes.push_back(std::move(oj));
            }
            events.push_back(std::move(evj));
        }
        *out_json = dup_string(j.dump());
    });
}

rt_status rt_pipeline_finish(rt_pipeline* pipeline, const char* tracks_path) {
    if (rt_status s = require(pipeline && tracks_path, "pipeline/path")) {
        return s;
    }
    return guarded([&] { write_tracks(pipeline->impl.output(), tracks_path); });
}

void rt_pipeline_free(rt_pipeline* pipeline) { delete pipeline; }

rt_status rt_synth_generate(const char* spec_json, const uint64_t* seed,
                            const char* out_dir, char** manifest_json) {
    if (rt_status s = require(spec_json && out_dir, "spec/out_dir")) return s;
    return guarded([&] {
        ScenarioSpec spec = scenario_from_json(spec_json);
        if (seed) spec.seed = *seed;
        const ScenarioBundle bundle = generate(spec);

        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) {
            throw Error(Errc::io_error, std::string("cannot create ") +
                                            out_dir + ": " + ec.message());
        }
        const std::string base = std::string(out_dir);
        const std::string dets = base + "/detections.jsonl";
        const std::string gt = base + "/gt.csv";
        const std::string gallery = base + "/gallery.jsonl";
        const std::string scen = base + "/scenario.json";
        write_detections(bundle.stream, dets);
        write_ground_truth(bundle.gt, gt);
        write_gallery(bundle.gallery, gallery);
        {
            std::ofstream f(scen);
            if (!f) {
                throw Error(Errc::io_error, "cannot open " + scen);
            }
            f << scenario_to_json(spec) << '\n';
        }

        if (manifest_json) {
            ordered_json m;
            m["detections"] = dets;
            m["ground_truth"] = gt;
            m["gallery"] = gallery;
            m["scenario"] = scen;
            m["frames"] = spec.frames;
            m["gt_detections"] = bundle.gt.total_detections();
            *manifest_json = dup_string(m.dump());
        }
    });
}

rt_status rt_track_file(const char* detections_path, const char* config_path,
                        const char* model_path, const char* tracks_path) {
    if (rt_status s =
            require(detections_path && tracks_path, "detections/tracks")) {
        return s;
    }
    return guarded([&] {
        const AppConfig cfg =
            config_path ? read_config(config_path) : AppConfig{};
        std::optional<RbfSvmModel> model;
        if (model_path) {
            model = read_model(model_path);
        } else if (cfg.reid_model) {
            model = read_model(*cfg.reid_model);
        }
        const auto stream = read_detections(detections_path);
        const TrackOutput out = run_stream(stream, to_pipeline_config(cfg),
                                           model ? &*model : nullptr);
        write_tracks(out, tracks_path);
    });
}

rt_status rt_evaluate(const char* tracks_path, const char* gt_path,
                      double iou_min, char** eval_json) {
    if (rt_status s =
            require(tracks_path && gt_path && eval_json, "tracks/gt/out")) {
        return s;
    }
    return guarded([&] {
        const TrackOutput out = read_tracks(tracks_path);
        const GroundTruth gt = read_ground_truth(gt_path);
        const EvalReport r =
            score(out, gt, iou_min > 0 ? iou_min : kDefaultEvalIou);
        *eval_json = dup_string(eval_report_to_json(r));
    });
}

rt_status rt_det_errors(const char* detections_path, const char* gt_path,
                        double iou_min, size_t* fn, size_t* fp) {
    if (rt_status s = require(detections_path && gt_path && fn && fp,
                              "detections/gt/fn/fp")) {
        return s;
    }
    return guarded([&] {
        const auto stream = read_detections(detections_path);
        const GroundTruth gt = read_ground_truth(gt_path);
        const auto [n, p] =
            count_det_errors(stream, gt, iou_min > 0 ? iou_min : kDefaultEvalIou);
        *fn = n;
        *fp = p;
    });
}

rt_status rt_run(const char* run_json, char** report_json) {
    if (rt_status s = require(run_json && report_json, "run/out")) return s;
    return guarded([&] {
        ordered_json j;
        try {
            j = ordered_json::parse(run_json);
        } catch (const ordered_json::exception& ex) {
            throw Error(Errc::bad_config,
                        std::string("run config: ") + ex.what());
        }
        if (!j.is_object()) {
            throw Error(Errc::bad_config, "run config must be an object");
        }

        RunConfig rc;
        try {
            if (j.contains("preset") && j.contains("scenario")) {
                throw Error(Errc::bad_config,
                            "run config: give preset or scenario, not both");
            }
            if (j.contains("preset")) {
                rc.scenario = preset(j["preset"].get<std::string>());
            }
            if (j.contains("scenario")) {
                rc.scenario = scenario_from_json(j["scenario"].dump());
            }
            if (j.contains("seed")) {
                rc.seed = j["seed"].get<std::uint64_t>();
            }
            if (j.contains("detections")) {
                rc.detections_path = j["detections"].get<std::string>();
            }
            if (j.contains("ground_truth")) {
                rc.gt_path = j["ground_truth"].get<std::string>();
            }
            if (j.contains("gallery")) {
                rc.gallery_path = j["gallery"].get<std::string>();
            }
            if (j.contains("model")) {
                rc.model_path = j["model"].get<std::string>();
            }
            if (j.contains("config_path") && j.contains("config_text")) {
                throw Error(Errc::bad_config,
                            "run config: config_path or config_text, "
                            "not both");
            }
            if (j.contains("config_path")) {
                rc.config = read_config(j["config_path"].get<std::string>());
            }
            if (j.contains("config_text")) {
                rc.config = parse_config(j["config_text"].get<std::string>());
            }
            if (j.contains("trackers")) {
                rc.trackers = j["trackers"].get<std::vector<std::string>>();
            }
            if (j.contains("tracks_dir")) {
                rc.tracks_dir = j["tracks_dir"].get<std::string>();
            }
            if (j.contains("reid")) rc.reid = j["reid"].get<bool>();
        } catch (const ordered_json::exception& ex) {
            throw Error(Errc::bad_config,
                        std::string("run config: ") + ex.what());
        }

        const ReportDocument report = run_workflow(rc);
        *report_json = dup_string(report_to_json(report));
    });
}

rt_status rt_render_report(const char* report_json, char** table_text) {
    if (rt_status s = require(report_json && table_text, "report/out")) {
        return s;
    }
    return guarded([&] {
        const ReportDocument report = report_from_json(report_json);
        *table_text = dup_string(render_table(report));
    });
}

} // extern "C"
