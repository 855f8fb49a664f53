// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reidtrack/classifier.hpp"
#include "reidtrack/tracker.hpp"

namespace reidtrack {

enum class ReidRule { new_or_unknown, duplicate_id, speed_limit };

const char* reid_rule_name(ReidRule r);

struct ReidOutcome {
    std::int64_t track_id = 0;
    Identity old_identity;
    Identity new_identity;
    double confidence = 0.0;
    bool classified = false; // false when no embedding was available
};

struct ReidEvent {
    long frame = 0;
    ReidRule rule = ReidRule::new_or_unknown;
    std::vector<std::int64_t> affected;
    std::vector<ReidOutcome> outcomes;
};

struct FrameEntry {
    std::int64_t track_id = 0;
    Identity identity;
    BBox bbox;
};

struct FrameOutput {
    long frame = 0;
    std::vector<FrameEntry> entries;
};

struct TrackOutput {
    std::vector<FrameOutput> frames;
    std::vector<ReidEvent> events;
    long reid_count = 0; // one per re-classified person per event
};

struct PipelineConfig {
    TrackerConfig tracker = CentroidConfig{};
    std::optional<double> reid_min_conf; // overrides the model's threshold
    std::optional<double> speed_limit;   // px/frame; absent = rule 3 off
};

// A re-identification candidate in a duplicate-label resolution: the
// track's fresh label ranking (empty when it had nothing to classify).
struct DuplicateCandidate {
    std::int64_t track_id = 0;
    std::vector<std::pair<std::string, double>> ranking;
};

/**
 * Deterministic duplicate-label resolution: candidates are visited by
 * descending top confidence (ties by ascending track id); each takes its
 * best label that is neither claimed by an earlier candidate nor held by a
 * live track outside the candidate set, subject to min_conf; otherwise it
 * goes Unknown. Candidates with no ranking always go Unknown.
 */
std::vector<std::pair<std::int64_t, Identity>> resolve_duplicates(
    const std::vector<DuplicateCandidate>& candidates,
    const std::set<std::string>& taken_elsewhere, double min_conf);

/**
 * Frame-by-frame orchestration: tracker step, then the identity rules.
 *   1. every detected track whose identity is Unknown is classified from
 *      its detection embedding;
 *   2. any Known label held by two or more tracks triggers reclassification
 *      of all holders, then resolve_duplicates;
 *   3. optionally, a track whose representative point jumped farther than
 *      speed_limit since its last detection is reclassified (off unless
 *      configured).
 * Tracker-only mode (null model) emits no events and leaves identities
 * Unknown; duplicate labels inherited inside the tracker are still pruned
 * (lowest track id keeps the label) so per-frame uniqueness always holds.
 */
class Pipeline {
public:
    Pipeline(const PipelineConfig& cfg, const RbfSvmModel* model);

    // Returns the per-frame output rows; events land in output().events.
    // Throws Errc::out_of_order_frame on non-increasing frame indices.
    FrameOutput process_frame(const FrameObservations& obs);

    const TrackOutput& output() const { return output_; }
    TrackOutput take_output() { return std::move(output_); }
    const Tracker& tracker() const { return *tracker_; }

private:
    void rule_new_or_unknown(const FrameObservations& obs,
                             const std::map<std::int64_t, std::size_t>& dets);
    void rule_duplicate_id(const FrameObservations& obs,
                           const std::map<std::int64_t, std::size_t>& dets);
    void rule_speed_limit(const FrameObservations& obs,
                          const std::map<std::int64_t, std::size_t>& dets);

    PipelineConfig cfg_;
    std::optional<RbfSvmModel> model_; // copy with the effective min_conf
    std::unique_ptr<Tracker> tracker_;
    std::map<std::int64_t, Point> last_point_; // rule-3 reference positions
    long last_frame_ = -1;
    long current_frame_ = 0;
    TrackOutput output_;
};

TrackOutput run_stream(const std::vector<FrameObservations>& stream,
                       const PipelineConfig& cfg, const RbfSvmModel* model);

} // namespace reidtrack
