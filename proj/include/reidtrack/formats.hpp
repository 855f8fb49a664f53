// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reidtrack/classifier.hpp"
#include "reidtrack/eval.hpp"
#include "reidtrack/pipeline.hpp"
#include "reidtrack/synth.hpp"

namespace reidtrack {

// Shortest decimal text that parses back to the same double ("17", "0.35",
// "1e-12"); keeps CSV/KV files diffable without precision loss.
std::string format_double(double v);

// Every reader accepts "-" for stdin and every writer "-" for stdout,
// except where a sidecar file makes that impossible (noted below).

// ---------------------------------------------------------------------------
// Detection streams: JSON Lines, one object per frame,
//   {"frame": n, "dets": [{"box": [x,y,w,h], "conf": c,
//                          "kps": [[x,y,c] x25]?,
//                          "emb": [..] | "emb_ref": byte_offset}]}
// Embeddings are inline doubles by default. With sidecar storage the
// vectors live in <path>.emb — 4-byte magic "RTEB", u32 little-endian dim,
// then packed 32-bit IEEE-754 little-endian floats — and each detection
// carries the byte offset of its vector.

enum class EmbeddingStorage { inline_json, sidecar };

std::vector<FrameObservations> read_detections(const std::string& path);
// Throws Errc::io_error for "-" with sidecar storage (no place for .emb).
void write_detections(const std::vector<FrameObservations>& stream,
                      const std::string& path,
                      EmbeddingStorage storage = EmbeddingStorage::inline_json);

// One detections line on its own, for callers that stream frames through
// the API instead of via files. Inline embeddings only — there is no
// sidecar to resolve emb_ref against.
FrameObservations detections_line_parse(const std::string& text);
std::string detections_line_dump(const FrameObservations& obs);

// ---------------------------------------------------------------------------
// Ground truth: CSV with header "frame,label,x,y,w,h". Labels are unique
// per frame (Errc::duplicate_label_in_frame otherwise).

GroundTruth read_ground_truth(const std::string& path);
void write_ground_truth(const GroundTruth& gt, const std::string& path);

// ---------------------------------------------------------------------------
// Training galleries: JSON Lines, {"label": "p1", "emb": [..]}.

std::vector<GallerySample> read_gallery(const std::string& path);
void write_gallery(const std::vector<GallerySample>& gallery,
                   const std::string& path);

// ---------------------------------------------------------------------------
// Classifier models: little-endian binary, magic "RTSV", format version,
// then dimensions, hyperparameters, and per-class machines. Bit-exact
// round trips. Errc::version_mismatch on a future version,
// Errc::parse_error on anything that is not a model file.

RbfSvmModel read_model(const std::string& path);
void write_model(const RbfSvmModel& model, const std::string& path);

// ---------------------------------------------------------------------------
// Tracker output: JSON Lines with a "type" tag per line — one "meta"
// header, a "frame" line per processed frame (events for that frame
// follow it as "event" lines), and a trailing "summary".

void write_tracks(const TrackOutput& output, const std::string& path);
TrackOutput read_tracks(const std::string& path);

// ---------------------------------------------------------------------------
// Scenario specs as JSON documents (the `synth --spec` input format and
// the `scenario` echo inside reports).

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Runtime configuration: flat "key = value" lines, '#' comments. Dotted
// keys cover the tracker (tracker.kind = centroid|sort|deepsort plus the
// kind's parameters), the re-identifier (reid.model, reid.min_conf,
// reid.speed_limit) and scoring (eval.iou_min). Unknown keys, malformed
// values, and parameters that do not belong to the chosen tracker all
// raise Errc::bad_config.

struct AppConfig {
    TrackerConfig tracker = CentroidConfig{};
    std::optional<std::string> reid_model;
    std::optional<double> reid_min_conf;
    std::optional<double> speed_limit;
    double eval_iou_min = kDefaultEvalIou;
};

AppConfig parse_config(const std::string& text);
AppConfig read_config(const std::string& path);

// Canonical echo: parse_config(config_echo(c)) reproduces c exactly. Only
// keys that influence the run appear; output locations never do.
std::vector<std::pair<std::string, std::string>> config_echo(
    const AppConfig& cfg);

const char* tracker_kind(const TrackerConfig& cfg);
PipelineConfig to_pipeline_config(const AppConfig& cfg);

// ---------------------------------------------------------------------------
// Reports: one JSON document per run — format version, the scenario echo
// (when the run synthesized its data), the configuration echo, and one
// row per tracker holding the detector error counts plus the evaluation
// with and without the re-identifier. Writing then reading a report
// reproduces it exactly.

struct ResultRow {
    std::string tracker;
    // full parameter set of this row's tracker, echoed so the row can be
    // reproduced even when several trackers share one report
    std::vector<std::pair<std::string, std::string>> params;
    std::size_t det_fn = 0;
    std::size_t det_fp = 0;
    EvalReport tracker_only;
    std::string reider;                  // empty when no model was attached
    std::optional<EvalReport> with_reid;
};

struct ReportDocument {
    int version = 1;
    std::optional<ScenarioSpec> scenario;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<ResultRow> rows;
};

// A single evaluation as a JSON object (the same shape the report rows
// embed); the `eval` command's output format.
std::string eval_report_to_json(const EvalReport& r);
EvalReport eval_report_from_json(const std::string& text);

std::string report_to_json(const ReportDocument& report);
ReportDocument report_from_json(const std::string& text);
void write_report(const ReportDocument& report, const std::string& path);
ReportDocument read_report(const std::string& path);

// Fixed-width table over the report rows:
//   DT | Tracker | Result | ReIDer | ReID Count | Incorrect ID | Result
std::string render_table(const ReportDocument& report);

} // namespace reidtrack
