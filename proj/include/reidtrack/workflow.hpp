// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reidtrack/formats.hpp"

namespace reidtrack {

// One end-to-end experiment: obtain data (synthesize a scenario or read
// files), obtain a classifier (load or train from a gallery), run each
// requested tracker with and without the re-identifier, and score both
// against ground truth.
struct RunConfig {
    std::optional<ScenarioSpec> scenario;     // synthesize when set
    std::optional<std::string> detections_path;
    std::optional<std::string> gt_path;
    std::optional<std::string> gallery_path;  // train from this
    std::optional<std::string> model_path;    // or load this
    std::optional<std::uint64_t> seed;        // overrides the scenario seed
    AppConfig config;
    std::vector<std::string> trackers;        // empty = centroid,sort,deepsort
    std::optional<std::string> tracks_dir;    // dump per-tracker tracks files
    bool reid = true;                         // false = tracker-only columns
};

ReportDocument run_workflow(const RunConfig& rc);

// Train a classifier from labeled embeddings with the library defaults
// (gamma from the median pairwise distance unless given).
RbfSvmModel train_from_gallery(const std::vector<GallerySample>& gallery,
                               std::optional<double> gamma = std::nullopt,
                               std::optional<double> c = std::nullopt,
                               std::optional<double> min_conf = std::nullopt);

} // namespace reidtrack
