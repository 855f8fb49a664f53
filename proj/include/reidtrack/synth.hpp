// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reidtrack/classifier.hpp"
#include "reidtrack/eval.hpp"
#include "reidtrack/geometry.hpp"

namespace reidtrack {

// Two agents approach, pass within a few pixels of each other, and swap
// courses over [span_begin, span_end]. occlude_frames > 0 additionally
// hides the second agent's detections for that many frames around the
// middle of the span (its ground truth stays, mimicking a person walking
// behind another).
struct CrossingEvent {
    std::vector<std::size_t> agents; // exactly two, distinct
    long span_begin = 0;
    long span_end = 0;
    long occlude_frames = 0;
};

// The agent walks to the image edge, is gone for [exit_frame,
// reenter_frame), and walks back in from the same edge.
struct ExitReenterEvent {
    std::size_t agent = 0;
    long exit_frame = 0;
    long reenter_frame = 0;
};

struct EmbeddingSpec {
    std::size_t dim = 32;
    double class_sep = 5.0; // multiple of the within-class std
    double noise_std = 1.0;
};

struct ScenarioSpec {
    std::size_t agents = 1;
    long frames = 1;
    double width = 640.0;
    double height = 480.0;
    std::vector<CrossingEvent> crossings;
    std::vector<ExitReenterEvent> exits;
    double det_noise = 0.0; // px std on box position
    double drop_rate = 0.0; // per-detection miss probability
    double fp_rate = 0.0;   // expected spurious boxes per frame (<= 1)
    EmbeddingSpec emb{};
    std::uint64_t seed = 0;
    std::size_t gallery_per_agent = 30;
};

struct ScenarioBundle {
    GroundTruth gt;
    std::vector<FrameObservations> stream; // one entry per frame, may be empty
    std::vector<GallerySample> gallery;
    ScenarioSpec spec;
};

/**
 * Deterministic scenario synthesis. Agents patrol straight lanes at
 * distinct heights; events bend those lanes (crossings bring a pair within
 * ~4 px of each other, exits walk an agent off-screen and back). All
 * segment speeds are validated against the 8 px/frame bound. Detections
 * are the ground truth plus seeded jitter/drops/spurious boxes; embeddings
 * are Gaussian classes on orthogonal axes, separated class_sep times the
 * within-class std. Throws Errc::invalid_spec.
 */
ScenarioBundle generate(const ScenarioSpec& spec);

// Agent labels are "p1", "p2", ... in lane order.
std::string agent_label(std::size_t index);

// Named presets; throws Errc::unknown_preset.
ScenarioSpec preset(const std::string& name);

} // namespace reidtrack
