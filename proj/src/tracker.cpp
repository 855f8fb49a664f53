// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/tracker.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "reidtrack/matching.hpp"

namespace reidtrack {

namespace {

constexpr double kForbidden = 1e9; // cost for pairs a gate has ruled out

// Min cosine distance between the detection embedding and the track's
// gallery; degenerate (zero-norm) vectors make the pair unmatchable
// instead of raising, since tracker steps never fail on odd data.
double gallery_distance(const std::deque<Embedding>& gallery,
                        const Embedding& emb) {
    double best = kForbidden;
    for (const auto& g : gallery) {
        if (g.size() != emb.size()) continue;
        try {
            best = std::min(best, cosine_distance(g, emb));
        } catch (const Error&) {
            // zero-norm vector: leave this pair unmatchable
        }
    }
    return best;
}

class CentroidTracker final : public Tracker {
public:
    explicit CentroidTracker(const CentroidConfig& cfg) : cfg_(cfg) {}

    StepResult step(const FrameObservations& obs) override {
        StepResult result;
        const std::size_t n_prev = tracks_.size();
        std::vector<char> claimed(n_prev, 0);
        std::vector<Track> next;

        // Pass 1: independent per-detection argmin against the previous
        // frame's representative points. The first detection to pick a track
        // keeps its id; later claimants become new tracks that inherit the
        // identity label, which is what surfaces duplicates downstream.
        std::vector<long> choice(obs.detections.size(), -1);
        for (std::size_t d = 0; d < obs.detections.size(); ++d) {
            const Point p = representative_point(obs.detections[d]);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < n_prev; ++t) {
                const double dist = euclidean(tracks_[t].repr_point, p);
                if (dist < best) {
                    best = dist;
                    choice[d] = static_cast<long>(t);
                }
            }
            if (choice[d] >= 0 && best > cfg_.max_dist) choice[d] = -1;
        }

        for (std::size_t d = 0; d < obs.detections.size(); ++d) {
            const Detection& det = obs.detections[d];
            if (choice[d] >= 0 && !claimed[static_cast<std::size_t>(choice[d])]) {
                const auto t = static_cast<std::size_t>(choice[d]);
                claimed[t] = 1;
                Track updated = tracks_[t];
                updated.repr_point = representative_point(det);
                updated.bbox = det.bbox;
                updated.hits += 1;
                updated.hit_streak += 1;
                updated.age_since_update = 0;
                next.push_back(std::move(updated));
                result.assignments.push_back({d, tracks_[t].track_id, false});
            } else {
                Track fresh;
                fresh.track_id = next_id_++;
                fresh.identity = choice[d] >= 0
                                     ? tracks_[static_cast<std::size_t>(choice[d])]
                                           .identity
                                     : Identity::unknown();
                fresh.repr_point = representative_point(det);
                fresh.bbox = det.bbox;
                fresh.hits = 1;
                fresh.hit_streak = 1;
                fresh.confirmed = true; // centroid has no probation period
                result.assignments.push_back({d, fresh.track_id, true});
                next.push_back(std::move(fresh));
            }
        }

        // Matching is strictly frame-to-frame, so anything unclaimed is gone.
        for (std::size_t t = 0; t < n_prev; ++t) {
            if (!claimed[t]) result.retired.push_back(tracks_[t].track_id);
        }
        tracks_ = std::move(next);
        return result;
    }

    std::vector<Track>& tracks() override { return tracks_; }

private:
    CentroidConfig cfg_;
    std::vector<Track> tracks_;
    std::int64_t next_id_ = 1;
};

class SortLikeTracker : public Tracker {
public:
    std::vector<Track>& tracks() override { return tracks_; }

protected:
    void predict_all(const SortConfig& cfg) {
        for (Track& t : tracks_) {
            if (t.kstate) {
                t.kstate = kf_predict(*t.kstate, cfg.kalman);
                t.bbox = state_bbox(*t.kstate);
                t.repr_point = t.bbox.center();
            }
            t.age_since_update += 1;
        }
    }

    void apply_match(Track& t, const Detection& det, const SortConfig& cfg) {
        if (t.kstate) {
            t.kstate = kf_update(*t.kstate, det.bbox, cfg.kalman);
            t.bbox = state_bbox(*t.kstate);
        } else if (det.bbox.area() > 0.0) {
            t.kstate = kf_init(det.bbox, cfg.kalman);
            t.bbox = det.bbox;
        } else {
            t.bbox = det.bbox;
        }
        t.repr_point = representative_point(det);
        t.hits += 1;
        t.hit_streak += 1;
        t.age_since_update = 0;
        if (t.hit_streak >= cfg.min_hits) t.confirmed = true;
    }

    Track spawn(const Detection& det, const SortConfig& cfg) {
        Track t;
        t.track_id = next_id_++;
        t.bbox = det.bbox;
        t.repr_point = representative_point(det);
        if (det.bbox.area() > 0.0) t.kstate = kf_init(det.bbox, cfg.kalman);
        t.hits = 1;
        t.hit_streak = 1;
        t.confirmed = cfg.min_hits <= 1;
        return t;
    }

    void retire_stale(const SortConfig& cfg, StepResult& result) {
        std::vector<Track> kept;
        kept.reserve(tracks_.size());
        for (Track& t : tracks_) {
            if (t.age_since_update > cfg.max_age) {
                result.retired.push_back(t.track_id);
            } else {
                if (t.age_since_update > 0) t.hit_streak = 0;
                kept.push_back(std::move(t));
            }
        }
        tracks_ = std::move(kept);
    }

    // IoU association between the given track slots and detection indices;
    // pairs below the threshold are rejected after the assignment.
    void match_by_iou(const std::vector<std::size_t>& track_idx,
                      const std::vector<std::size_t>& det_idx,
                      const FrameObservations& obs, const SortConfig& cfg,
                      std::vector<std::pair<std::size_t, std::size_t>>& matches,
                      std::vector<std::size_t>& leftover_dets) {
        if (track_idx.empty()) {
            leftover_dets = det_idx;
            return;
        }
        CostMatrix cost(track_idx.size(), det_idx.size());
        for (std::size_t r = 0; r < track_idx.size(); ++r) {
            for (std::size_t c = 0; c < det_idx.size(); ++c) {
                cost.at(r, c) = 1.0 - iou(tracks_[track_idx[r]].bbox,
                                          obs.detections[det_idx[c]].bbox);
            }
        }
        const Assignment a = hungarian(cost);
        std::vector<char> det_taken(det_idx.size(), 0);
        for (const auto& [r, c] : a.pairs) {
            if (1.0 - cost.at(r, c) < cfg.iou_thresh) continue;
            matches.emplace_back(track_idx[r], det_idx[c]);
            det_taken[c] = 1;
        }
        for (std::size_t c = 0; c < det_idx.size(); ++c) {
            if (!det_taken[c]) leftover_dets.push_back(det_idx[c]);
        }
    }

    std::vector<Track> tracks_;
    std::int64_t next_id_ = 1;
};

class SortTracker final : public SortLikeTracker {
public:
    explicit SortTracker(const SortConfig& cfg) : cfg_(cfg) {}

    StepResult step(const FrameObservations& obs) override {
        StepResult result;
        predict_all(cfg_);

        std::vector<std::size_t> all_tracks(tracks_.size());
        std::vector<std::size_t> all_dets(obs.detections.size());
        for (std::size_t i = 0; i < all_tracks.size(); ++i) all_tracks[i] = i;
        for (std::size_t i = 0; i < all_dets.size(); ++i) all_dets[i] = i;

        std::vector<std::pair<std::size_t, std::size_t>> matches;
        std::vector<std::size_t> unmatched_dets;
        match_by_iou(all_tracks, all_dets, obs, cfg_, matches, unmatched_dets);

        std::map<std::size_t, DetAssignment> by_det;
        for (const auto& [t, d] : matches) {
            apply_match(tracks_[t], obs.detections[d], cfg_);
            by_det[d] = {d, tracks_[t].track_id, false};
        }
        for (const std::size_t d : unmatched_dets) {
            Track fresh = spawn(obs.detections[d], cfg_);
            by_det[d] = {d, fresh.track_id, true};
            tracks_.push_back(std::move(fresh));
        }
        for (auto& [d, a] : by_det) result.assignments.push_back(a);

        retire_stale(cfg_, result);
        return result;
    }

private:
    SortConfig cfg_;
};

class DeepSortTracker final : public SortLikeTracker {
public:
    explicit DeepSortTracker(const DeepSortConfig& cfg) : cfg_(cfg) {}

    StepResult step(const FrameObservations& obs) override {
        StepResult result;

        // Detection-level overlap suppression: higher confidence wins,
        // earlier index wins ties. Suppressed detections vanish from the
        // step entirely.
        std::vector<std::size_t> order(obs.detections.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return obs.detections[a].conf >
                                    obs.detections[b].conf;
                         });
        std::vector<std::size_t> survivors;
        for (const std::size_t cand : order) {
            bool keep = true;
            for (const std::size_t k : survivors) {
                if (iou(obs.detections[cand].bbox, obs.detections[k].bbox) >
                    cfg_.nms_overlap) {
                    keep = false;
                    break;
                }
            }
            if (keep) survivors.push_back(cand);
        }
        std::sort(survivors.begin(), survivors.end());

        predict_all(cfg_.sort);

        // Stage 1: appearance cascade over confirmed tracks, most recently
        // updated first. Only detections that carry embeddings take part.
        std::vector<char> track_used(tracks_.size(), 0);
        std::vector<char> det_used(obs.detections.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> matches;

        std::vector<long> ages;
        for (const Track& t : tracks_) {
            if (t.confirmed && !t.appearance_gallery.empty()) {
                ages.push_back(t.age_since_update);
            }
        }
        std::sort(ages.begin(), ages.end());
        ages.erase(std::unique(ages.begin(), ages.end()), ages.end());

        for (const long age : ages) {
            std::vector<std::size_t> level_tracks;
            for (std::size_t t = 0; t < tracks_.size(); ++t) {
                if (!track_used[t] && tracks_[t].confirmed &&
                    !tracks_[t].appearance_gallery.empty() &&
                    tracks_[t].age_since_update == age) {
                    level_tracks.push_back(t);
                }
            }
            std::vector<std::size_t> level_dets;
            for (const std::size_t d : survivors) {
                if (!det_used[d] && obs.detections[d].embedding) {
                    level_dets.push_back(d);
                }
            }
            if (level_tracks.empty() || level_dets.empty()) continue;

            CostMatrix cost(level_tracks.size(), level_dets.size());
            for (std::size_t r = 0; r < level_tracks.size(); ++r) {
                for (std::size_t c = 0; c < level_dets.size(); ++c) {
                    const double dist = gallery_distance(
                        tracks_[level_tracks[r]].appearance_gallery,
                        *obs.detections[level_dets[c]].embedding);
                    cost.at(r, c) = dist <= cfg_.max_cos_dist ? dist
                                                              : kForbidden;
                }
            }
            const Assignment a = hungarian(cost);
            for (const auto& [r, c] : a.pairs) {
                if (cost.at(r, c) > cfg_.max_cos_dist) continue;
                matches.emplace_back(level_tracks[r], level_dets[c]);
                track_used[level_tracks[r]] = 1;
                det_used[level_dets[c]] = 1;
            }
        }

        // Stage 2: whatever is left falls back to motion-only association.
        std::vector<std::size_t> rest_tracks;
        for (std::size_t t = 0; t < tracks_.size(); ++t) {
            if (!track_used[t]) rest_tracks.push_back(t);
        }
        std::vector<std::size_t> rest_dets;
        for (const std::size_t d : survivors) {
            if (!det_used[d]) rest_dets.push_back(d);
        }
        std::vector<std::size_t> unmatched_dets;
        match_by_iou(rest_tracks, rest_dets, obs, cfg_.sort, matches,
                     unmatched_dets);

        std::map<std::size_t, DetAssignment> by_det;
        for (const auto& [t, d] : matches) {
            apply_match(tracks_[t], obs.detections[d], cfg_.sort);
            absorb_embedding(tracks_[t], obs.detections[d]);
            by_det[d] = {d, tracks_[t].track_id, false};
        }
        for (const std::size_t d : unmatched_dets) {
            Track fresh = spawn(obs.detections[d], cfg_.sort);
            absorb_embedding(fresh, obs.detections[d]);
            by_det[d] = {d, fresh.track_id, true};
            tracks_.push_back(std::move(fresh));
        }
        for (auto& [d, a] : by_det) result.assignments.push_back(a);

        retire_stale(cfg_.sort, result);
        return result;
    }

private:
    void absorb_embedding(Track& t, const Detection& det) {
        if (!det.embedding) return;
        t.appearance_gallery.push_back(*det.embedding);
        while (t.appearance_gallery.size() > cfg_.nn_budget) {
            t.appearance_gallery.pop_front();
        }
    }

    DeepSortConfig cfg_;
};

} // namespace

Track* Tracker::find_track(std::int64_t id) {
    for (Track& t : tracks()) {
        if (t.track_id == id) return &t;
    }
    return nullptr;
}

std::unique_ptr<Tracker> make_tracker(const TrackerConfig& cfg) {
    return std::visit(
        [](const auto& c) -> std::unique_ptr<Tracker> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, CentroidConfig>) {
                return std::make_unique<CentroidTracker>(c);
            } else if constexpr (std::is_same_v<T, SortConfig>) {
                return std::make_unique<SortTracker>(c);
            } else {
                return std::make_unique<DeepSortTracker>(c);
            }
        },
        cfg);
}

} // namespace reidtrack
