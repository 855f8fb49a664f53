// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/eval.hpp"

#include <algorithm>
#include <set>

#include "reidtrack/matching.hpp"

namespace reidtrack {

MatchResult match_frame(const std::vector<BBox>& pred,
                        const std::vector<BBox>& gt, double iou_min) {
    MatchResult out;
    if (pred.empty() || gt.empty()) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            out.unmatched_pred.push_back(i);
        }
        for (std::size_t i = 0; i < gt.size(); ++i) {
            out.unmatched_gt.push_back(i);
        }
        return out;
    }
    CostMatrix cost(pred.size(), gt.size());
    for (std::size_t r = 0; r < pred.size(); ++r) {
        for (std::size_t c = 0; c < gt.size(); ++c) {
            cost.at(r, c) = 1.0 - iou(pred[r], gt[c]);
        }
    }
    const Assignment a = hungarian(cost);
    std::vector<char> pred_used(pred.size(), 0), gt_used(gt.size(), 0);
    for (const auto& [r, c] : a.pairs) {
        if (1.0 - cost.at(r, c) < iou_min) continue;
        out.pairs.emplace_back(r, c);
        pred_used[r] = 1;
        gt_used[c] = 1;
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!pred_used[i]) out.unmatched_pred.push_back(i);
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!gt_used[i]) out.unmatched_gt.push_back(i);
    }
    return out;
}

double truncated_pct(std::size_t total, std::size_t incorrect) {
    if (total == 0) return 100.0;
    const unsigned long long basis =
        10000ULL * (total - incorrect) / total; // floor division
    return static_cast<double>(basis) / 100.0;
}

EvalReport score(const TrackOutput& output, const GroundTruth& gt,
                 double iou_min) {
    const long gt_frames = gt.total_frames();
    const long out_frames =
        output.frames.empty() ? 0 : output.frames.back().frame + 1;
    if (gt_frames != out_frames) {
        throw Error(Errc::frame_range_mismatch,
                    "score: ground truth spans " + std::to_string(gt_frames) +
                        " frames but output covers " +
                        std::to_string(out_frames));
    }

    std::map<long, const FrameOutput*> by_frame;
    for (const auto& f : output.frames) by_frame[f.frame] = &f;

    EvalReport rep;
    rep.total_gt = gt.total_detections();
    rep.reid_count = output.reid_count;
    rep.reid_events = output.events.size();

    // Track-persistence references for Unknown predictions: each gt label
    // latches onto the first track id it is seen with, and a track id can
    // vouch for only one label.
    std::map<std::string, std::int64_t> reference;
    std::set<std::int64_t> reference_ids;

    static const std::vector<GtEntry> no_gt;
    static const FrameOutput no_pred;
    for (long f = 0; f < std::max(gt_frames, out_frames); ++f) {
        const auto git = gt.frames.find(f);
        const std::vector<GtEntry>& gt_rows =
            git != gt.frames.end() ? git->second : no_gt;
        const auto pit = by_frame.find(f);
        const FrameOutput& pred = pit != by_frame.end() ? *pit->second
                                                        : no_pred;

        std::vector<BBox> pred_boxes, gt_boxes;
        for (const auto& e : pred.entries) pred_boxes.push_back(e.bbox);
        for (const auto& e : gt_rows) gt_boxes.push_back(e.bbox);
        MatchResult m = match_frame(pred_boxes, gt_boxes, iou_min);

        FrameScore fs;
        fs.frame = f;
        fs.gt_count = gt_rows.size();
        fs.fn = m.unmatched_gt.size();
        fs.fp = m.unmatched_pred.size();

        // visit pairs in ground-truth order so reference latching does not
        // depend on prediction order
        std::sort(m.pairs.begin(), m.pairs.end(),
                  [](const auto& a, const auto& b) {
                      return a.second < b.second;
                  });
        for (const auto& [p, g] : m.pairs) {
            const FrameEntry& entry = pred.entries[p];
            const std::string& want = gt_rows[g].label;
            bool correct;
            if (entry.identity.is_known()) {
                correct = entry.identity.label() == want;
            } else {
                const auto ref = reference.find(want);
                if (ref != reference.end()) {
                    correct = ref->second == entry.track_id;
                } else if (reference_ids.count(entry.track_id) == 0) {
                    reference[want] = entry.track_id;
                    reference_ids.insert(entry.track_id);
                    correct = true;
                } else {
                    correct = false; // that track already vouches elsewhere
                }
            }
            if (!correct) fs.incorrect += 1;
        }
        fs.incorrect += m.unmatched_gt.size(); // untracked people are wrong

        rep.incorrect_id += fs.incorrect;
        rep.fn += fs.fn;
        rep.fp += fs.fp;
        rep.per_frame.push_back(fs);
    }

    rep.correct_pct = truncated_pct(rep.total_gt, rep.incorrect_id);
    return rep;
}

std::pair<std::size_t, std::size_t> count_det_errors(
    const std::vector<FrameObservations>& stream, const GroundTruth& gt,
    double iou_min) {
    std::size_t fn = 0, fp = 0;
    std::map<long, const FrameObservations*> by_frame;
    for (const auto& f : stream) by_frame[f.frame] = &f;

    std::set<long> all_frames;
    for (const auto& [f, obs] : by_frame) all_frames.insert(f);
    for (const auto& [f, rows] : gt.frames) all_frames.insert(f);

    for (const long f : all_frames) {
        std::vector<BBox> det_boxes, gt_boxes;
        const auto dit = by_frame.find(f);
        if (dit != by_frame.end()) {
            for (const auto& d : dit->second->detections) {
                det_boxes.push_back(d.bbox);
            }
        }
        const auto git = gt.frames.find(f);
        if (git != gt.frames.end()) {
            for (const auto& e : git->second) gt_boxes.push_back(e.bbox);
        }
        const MatchResult m = match_frame(det_boxes, gt_boxes, iou_min);
        fn += m.unmatched_gt.size();
        fp += m.unmatched_pred.size();
    }
    return {fn, fp};
}

} // namespace reidtrack
