/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the reidtrack library: multi-person tracking with an
 * SVM-based re-identification gate, plus the scenario synthesizer and the
 * evaluation kit.
 *
 * Conventions:
 *   - Every function returns an rt_status; RT_OK means success.
 *   - On failure, rt_last_error() describes what went wrong (thread-local,
 *     valid until the next failing call on the same thread).
 *   - Strings returned through char** parameters are heap-allocated and
 *     must be released with rt_string_free().
 *   - JSON/text parameters and results use the same formats as the files
 *     (see the README): detection lines, scenario specs, run configs,
 *     reports.
 */
#ifndef REIDTRACK_H
#define REIDTRACK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rt_status {
    RT_OK = 0,
    RT_USAGE_ERROR = 1,  /* bad configuration / unknown preset */
    RT_DATA_ERROR = 2,   /* malformed or inconsistent input data */
    RT_INTERNAL_ERROR = 3
} rt_status;

/* Message for the most recent failure on this thread ("" if none). */
const char* rt_last_error(void);

void rt_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Classifier models                                                   */

typedef struct rt_model rt_model;

/* Train from a gallery file (JSON lines of {"label", "emb"}). Pass
 * gamma <= 0 for the median-distance heuristic, c <= 0 and min_conf < 0
 * for the defaults. */
rt_status rt_model_train(const char* gallery_path, double gamma, double c,
                         double min_conf, rt_model** out);

rt_status rt_model_load(const char* path, rt_model** out);
rt_status rt_model_save(const rt_model* model, const char* path);

/* embedding_json: a JSON array of numbers. Result:
 * {"label": "p1"|null, "confidence": c, "ranking": [["p1", c1], ...]}. */
rt_status rt_model_classify_json(const rt_model* model,
                                 const char* embedding_json, char** out_json);

void rt_model_free(rt_model* model);

/* ------------------------------------------------------------------ */
/* Streaming pipeline                                                  */

typedef struct rt_pipeline rt_pipeline;

/* config_text: the flat key=value configuration ("" for defaults; the
 * centroid tracker). model may be NULL for tracker-only operation; the
 * pipeline keeps its own copy. */
rt_status rt_pipeline_create(const char* config_text, const rt_model* model,
                             rt_pipeline** out);

/* frame_json: one detections line, {"frame": n, "dets": [...]} with
 * inline embeddings. Frames must strictly increase. Result: that frame's
 * rows and re-identification events,
 * {"frame": n, "entries": [...], "events": [...]} in the tracks-file
 * shapes. */
rt_status rt_pipeline_process_json(rt_pipeline* pipeline,
                                   const char* frame_json, char** out_json);

/* Write everything processed so far as a tracks file ("-" = stdout). */
rt_status rt_pipeline_finish(rt_pipeline* pipeline, const char* tracks_path);

void rt_pipeline_free(rt_pipeline* pipeline);

/* ------------------------------------------------------------------ */
/* Whole-file operations                                               */

/* Synthesize a scenario. spec_json is either a full spec document or
 * {"preset": "normal_high" | "hard_surveillance", ...overrides}. seed, when
 * non-NULL, overrides the spec's seed. Writes detections.jsonl, gt.csv,
 * gallery.jsonl and scenario.json under out_dir (created if needed) and
 * returns a manifest naming them, e.g.
 * {"detections": path, ..., "frames": n, "gt_detections": n}. */
rt_status rt_synth_generate(const char* spec_json, const uint64_t* seed,
                            const char* out_dir, char** manifest_json);

/* Track a detections file end to end. config_path and model_path may be
 * NULL (defaults / tracker-only). Writes a tracks file. */
rt_status rt_track_file(const char* detections_path, const char* config_path,
                        const char* model_path, const char* tracks_path);

/* Score a tracks file against ground truth; returns the evaluation as a
 * JSON object. iou_min <= 0 selects the default (0.5). */
rt_status rt_evaluate(const char* tracks_path, const char* gt_path,
                      double iou_min, char** eval_json);

/* Detector quality alone: false negatives / false positives from box
 * matching, ignoring identity. */
rt_status rt_det_errors(const char* detections_path, const char* gt_path,
                        double iou_min, size_t* fn, size_t* fp);

/* One full experiment (synthesize or read inputs, train or load the
 * classifier, run trackers with and without it, score everything).
 * run_json keys: "preset" | "scenario" (spec object), "seed",
 * "detections", "ground_truth", "gallery", "model", "config_path",
 * "config_text", "trackers" (array), "tracks_dir", "reid" (bool).
 * Returns the report document. */
rt_status rt_run(const char* run_json, char** report_json);

/* Render a report document as the fixed-width results table. */
rt_status rt_render_report(const char* report_json, char** table_text);

/* Library/report format version. */
int rt_format_version(void);

#ifdef __cplusplus
}
#endif

#endif /* REIDTRACK_H */
