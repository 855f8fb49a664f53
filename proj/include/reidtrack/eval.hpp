// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "reidtrack/pipeline.hpp"

namespace reidtrack {

struct GtEntry {
    std::string label;
    BBox bbox;
};

// Per-frame labeled boxes; labels are unique within a frame (enforced by
// the readers). The manifest values derive from the data: total_frames is
// the highest listed frame + 1.
struct GroundTruth {
    std::map<long, std::vector<GtEntry>> frames;

    long total_frames() const {
        return frames.empty() ? 0 : frames.rbegin()->first + 1;
    }
    std::size_t total_detections() const {
        std::size_t n = 0;
        for (const auto& [f, entries] : frames) n += entries.size();
        return n;
    }
};

struct FrameScore {
    long frame = 0;
    std::size_t gt_count = 0;
    std::size_t incorrect = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
};

struct EvalReport {
    std::size_t total_gt = 0;
    std::size_t incorrect_id = 0;
    double correct_pct = 100.0; // truncated, not rounded, to 2 decimals
    long reid_count = 0;
    std::size_t reid_events = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::vector<FrameScore> per_frame;
};

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (pred, gt)
    std::vector<std::size_t> unmatched_pred;
    std::vector<std::size_t> unmatched_gt;
};

// Spatial matching only: minimum-cost assignment on 1 - IoU, pairs below
// iou_min rejected. Identity plays no part here.
MatchResult match_frame(const std::vector<BBox>& pred,
                        const std::vector<BBox>& gt, double iou_min);

// 100 * (total - incorrect) / total truncated to two decimals, computed in
// integer arithmetic so printed percentages match exactly. total == 0
// scores 100 by convention.
double truncated_pct(std::size_t total, std::size_t incorrect);

constexpr double kDefaultEvalIou = 0.5;

/**
 * Scores tracker output against ground truth. A matched prediction is
 * correct when its Known label equals the ground-truth label; Unknown
 * predictions are scored by track persistence instead: the first track id
 * matched to a ground-truth identity becomes its reference, and later
 * Unknown matches are correct only from that same track. Every unmatched
 * ground-truth detection counts as incorrect. Throws
 * Errc::frame_range_mismatch when output and ground truth disagree on the
 * frame range.
 */
EvalReport score(const TrackOutput& output, const GroundTruth& gt,
                 double iou_min = kDefaultEvalIou);

// Identity-blind detector accounting: false negatives and false positives
// from pure box matching.
std::pair<std::size_t, std::size_t> count_det_errors(
    const std::vector<FrameObservations>& stream, const GroundTruth& gt,
    double iou_min = kDefaultEvalIou);

} // namespace reidtrack
