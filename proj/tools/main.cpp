// SPDX-License-Identifier: Apache-2.0
//
// reidtrack command-line front end. Everything substantive happens behind
// the library's C interface; this file only parses arguments, shuttles
// strings, and maps statuses to exit codes (0 ok, 1 usage, 2 bad data).
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reidtrack.h"

namespace {

using ordered_json = nlohmann::ordered_json;

int fail(rt_status status) {
    std::cerr << "error: " << rt_last_error() << "\n";
    return static_cast<int>(status);
}

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream f(path);
    if (!f) {
        std::cerr << "error: cannot open " << path << "\n";
        std::exit(1);
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

int spill(const std::string& text, const std::string& path) {
    if (path == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream f(path);
    if (!f) {
        std::cerr << "error: cannot open " << path << " for writing\n";
        return 1;
    }
    f << text;
    f.flush();
    if (!f) {
        std::cerr << "error: short write to " << path << "\n";
        return 2;
    }
    return 0;
}

// Owns a string returned through the C interface.
class CStr {
public:
    CStr() = default;
    ~CStr() { rt_string_free(ptr_); }
    CStr(const CStr&) = delete;
    CStr& operator=(const CStr&) = delete;
    char** out() { return &ptr_; }
    std::string str() const { return ptr_ ? ptr_ : ""; }

private:
    char* ptr_ = nullptr;
};

struct SynthArgs {
    std::string preset, spec_path, out_dir;
    std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
    std::string spec_json;
    if (!a.preset.empty()) {
        ordered_json j;
        j["preset"] = a.preset;
        spec_json = j.dump();
    } else {
        spec_json = slurp(a.spec_path);
    }
    const std::uint64_t seed_val = a.seed.value_or(0);
    CStr manifest;
    const rt_status s =
        rt_synth_generate(spec_json.c_str(), a.seed ? &seed_val : nullptr,
                          a.out_dir.c_str(), manifest.out());
    if (s != RT_OK) return fail(s);
    std::cout << manifest.str() << "\n";
    return 0;
}

struct TrainArgs {
    std::string gallery, out;
    double gamma = 0.0, c = 0.0, min_conf = -1.0;
};

int cmd_train(const TrainArgs& a) {
    rt_model* model = nullptr;
    rt_status s =
        rt_model_train(a.gallery.c_str(), a.gamma, a.c, a.min_conf, &model);
    if (s != RT_OK) return fail(s);
    s = rt_model_save(model, a.out.c_str());
    rt_model_free(model);
    if (s != RT_OK) return fail(s);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

struct TrackArgs {
    std::string dets, config, model, out;
};

int cmd_track(const TrackArgs& a) {
    const rt_status s = rt_track_file(
        a.dets.c_str(), a.config.empty() ? nullptr : a.config.c_str(),
        a.model.empty() ? nullptr : a.model.c_str(), a.out.c_str());
    if (s != RT_OK) return fail(s);
    return 0;
}

struct EvalArgs {
    std::string tracks, gt, out = "-";
    double iou_min = 0.0;
};

int cmd_eval(const EvalArgs& a) {
    CStr result;
    const rt_status s = rt_evaluate(a.tracks.c_str(), a.gt.c_str(), a.iou_min,
                                    result.out());
    if (s != RT_OK) return fail(s);
    return spill(result.str(), a.out);
}

struct RunArgs {
    std::string preset, spec_path, dets, gt, gallery, model, config;
    std::string out = "-", tracks_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> trackers;
    bool no_reid = false;
};

int cmd_run(const RunArgs& a) {
    ordered_json j;
    if (!a.preset.empty()) j["preset"] = a.preset;
    if (!a.spec_path.empty()) {
        try {
            j["scenario"] = ordered_json::parse(slurp(a.spec_path));
        } catch (const ordered_json::exception& ex) {
            std::cerr << "error: " << a.spec_path << ": " << ex.what() << "\n";
            return 2;
        }
    }
    if (a.seed) j["seed"] = *a.seed;
    if (!a.dets.empty()) j["detections"] = a.dets;
    if (!a.gt.empty()) j["ground_truth"] = a.gt;
    if (!a.gallery.empty()) j["gallery"] = a.gallery;
    if (!a.model.empty()) j["model"] = a.model;
    if (!a.config.empty()) j["config_path"] = a.config;
    if (!a.trackers.empty()) j["trackers"] = a.trackers;
    if (!a.tracks_dir.empty()) j["tracks_dir"] = a.tracks_dir;
    if (a.no_reid) j["reid"] = false;

    CStr report;
    rt_status s = rt_run(j.dump().c_str(), report.out());
    if (s != RT_OK) return fail(s);
    if (const int rc = spill(report.str(), a.out)) return rc;

    if (a.out != "-") {
        // report went to a file; show the human-readable summary here
        CStr table;
        s = rt_render_report(report.str().c_str(), table.out());
        if (s != RT_OK) return fail(s);
        std::cout << table.str();
    }
    return 0;
}

int cmd_report(const std::string& in) {
    const std::string text = slurp(in);
    CStr table;
    const rt_status s = rt_render_report(text.c_str(), table.out());
    if (s != RT_OK) return fail(s);
    std::cout << table.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-person tracking with SVM re-identification: "
                 "scenario synthesis, tracking, training, evaluation."};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a synthetic scenario bundle");
    auto* preset_opt =
        synth_cmd->add_option("--preset", synth.preset,
                              "Named scenario (normal_high, "
                              "hard_surveillance)");
    synth_cmd->add_option("--spec", synth.spec_path,
                          "Scenario spec JSON file ('-' = stdin)")
        ->excludes(preset_opt);
    synth_cmd->add_option("--seed", synth.seed, "Override the spec's seed");
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")
        ->required();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand(
        "train-reid", "Train the RBF-SVM classifier from a gallery");
    train_cmd->add_option("--gallery", train.gallery, "Gallery JSONL file")
        ->required();
    train_cmd->add_option("--out", train.out, "Model file to write")
        ->required();
    train_cmd->add_option("--gamma", train.gamma,
                          "Kernel length scale (default: median pairwise "
                          "distance)");
    train_cmd->add_option("--c", train.c, "Soft-margin C (default 10)");
    train_cmd->add_option("--min-conf", train.min_conf,
                          "Confidence threshold stored in the model "
                          "(default 0.35)");

    TrackArgs track;
    auto* track_cmd =
        app.add_subcommand("track", "Run a tracker over a detections file");
    track_cmd->add_option("--dets", track.dets,
                          "Detections JSONL ('-' = stdin)")
        ->required();
    track_cmd->add_option("--config", track.config, "key=value config file");
    track_cmd->add_option("--model", track.model,
                          "Classifier model (enables the re-identifier)");
    track_cmd->add_option("--out", track.out, "Tracks file to write")
        ->required();

    EvalArgs eval;
    auto* eval_cmd =
        app.add_subcommand("eval", "Score a tracks file against ground truth");
    eval_cmd->add_option("--tracks", eval.tracks, "Tracks JSONL file")
        ->required();
    eval_cmd->add_option("--gt", eval.gt, "Ground-truth CSV file")->required();
    eval_cmd->add_option("--iou-min", eval.iou_min,
                         "Match threshold (default 0.5)");
    eval_cmd->add_option("--out", eval.out,
                         "Where to write the evaluation JSON (default "
                         "stdout)");

    RunArgs run;
    auto* run_cmd = app.add_subcommand(
        "run", "Full experiment: data, training, tracking, scoring");
    auto* run_preset =
        run_cmd->add_option("--preset", run.preset, "Named scenario");
    run_cmd->add_option("--spec", run.spec_path, "Scenario spec JSON file")
        ->excludes(run_preset);
    run_cmd->add_option("--dets", run.dets, "Detections JSONL (file inputs)");
    run_cmd->add_option("--gt", run.gt, "Ground-truth CSV (file inputs)");
    run_cmd->add_option("--gallery", run.gallery,
                        "Gallery JSONL to train from");
    run_cmd->add_option("--model", run.model, "Pre-trained classifier model");
    run_cmd->add_option("--config", run.config, "key=value config file");
    run_cmd->add_option("--seed", run.seed, "Scenario seed override");
    run_cmd->add_option("--tracker", run.trackers,
                        "Tracker(s) to run (default: centroid, sort, "
                        "deepsort)");
    run_cmd->add_option("--tracks-dir", run.tracks_dir,
                        "Also write per-tracker tracks files here");
    run_cmd->add_option("--out", run.out,
                        "Report JSON destination (default stdout)");
    run_cmd->add_flag("--no-reid", run.no_reid,
                      "Skip the re-identifier columns");

    std::string report_in = "-";
    auto* report_cmd =
        app.add_subcommand("report", "Render a report as a results table");
    report_cmd->add_option("--in", report_in,
                           "Report JSON file (default stdin)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (synth_cmd->parsed()) {
        if (synth.preset.empty() && synth.spec_path.empty()) {
            std::cerr << "error: synth needs --preset or --spec\n";
            return 1;
        }
        return cmd_synth(synth);
    }
    if (train_cmd->parsed()) return cmd_train(train);
    if (track_cmd->parsed()) return cmd_track(track);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (run_cmd->parsed()) return cmd_run(run);
    if (report_cmd->parsed()) return cmd_report(report_in);
    return 1;
}
