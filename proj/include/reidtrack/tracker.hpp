// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "reidtrack/geometry.hpp"
#include "reidtrack/kalman.hpp"

namespace reidtrack {

struct Track {
    std::int64_t track_id = 0;
    Identity identity;
    Point repr_point{0.0, 0.0};
    BBox bbox;
    std::optional<KalmanState> kstate;
    long hits = 0;              // total matched frames, monotone
    long hit_streak = 0;        // consecutive matched frames
    long age_since_update = 0;  // frames since the last matched detection
    std::deque<Embedding> appearance_gallery; // bounded by nn_budget
    bool confirmed = false;
};

struct CentroidConfig {
    double max_dist = 50.0;
};

struct SortConfig {
    long max_age = 1;
    long min_hits = 3;
    double iou_thresh = 0.3;
    KalmanConfig kalman{};
};

struct DeepSortConfig {
    SortConfig sort{};
    std::size_t nn_budget = 100;
    double nms_overlap = 0.5;
    double max_cos_dist = 0.1;
};

using TrackerConfig = std::variant<CentroidConfig, SortConfig, DeepSortConfig>;

struct DetAssignment {
    std::size_t det_index = 0;
    std::int64_t track_id = 0;
    bool is_new_track = false;
};

// One entry per surviving input detection (appearance NMS may discard
// detections before matching; discarded ones get no entry).
struct StepResult {
    std::vector<DetAssignment> assignments;
    std::vector<std::int64_t> retired;
};

/**
 * Stateful single-stream tracker. step() consumes one frame of detections;
 * live tracks are exposed for the identity layer to read and repair.
 * Track ids start at 1 and are never reused within a run.
 */
class Tracker {
public:
    virtual ~Tracker() = default;
    virtual StepResult step(const FrameObservations& obs) = 0;
    virtual std::vector<Track>& tracks() = 0;
    const std::vector<Track>& tracks() const {
        return const_cast<Tracker*>(this)->tracks();
    }
    Track* find_track(std::int64_t id);
};

std::unique_ptr<Tracker> make_tracker(const TrackerConfig& cfg);

} // namespace reidtrack
