// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/pipeline.hpp"

#include <algorithm>

#include "reidtrack/matching.hpp"

namespace reidtrack {

const char* reid_rule_name(ReidRule r) {
    switch (r) {
    case ReidRule::new_or_unknown: return "new_or_unknown";
    case ReidRule::duplicate_id: return "duplicate_id";
    case ReidRule::speed_limit: return "speed_limit";
    }
    return "?";
}

std::vector<std::pair<std::int64_t, Identity>> resolve_duplicates(
    const std::vector<DuplicateCandidate>& candidates,
    const std::set<std::string>& taken_elsewhere, double min_conf) {
    std::vector<std::size_t> order;
    std::vector<std::pair<std::int64_t, Identity>> result;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].ranking.empty()) {
            result.emplace_back(candidates[i].track_id, Identity::unknown());
        } else {
            order.push_back(i);
        }
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ca = candidates[a].ranking.front().second;
        const double cb = candidates[b].ranking.front().second;
        if (ca != cb) return ca > cb;
        return candidates[a].track_id < candidates[b].track_id;
    });

    std::set<std::string> taken = taken_elsewhere;
    for (const std::size_t i : order) {
        Identity chosen = Identity::unknown();
        for (const auto& [label, conf] : candidates[i].ranking) {
            if (conf < min_conf) break; // ranking is sorted, nothing clears
            if (taken.count(label) == 0) {
                chosen = Identity::known(label);
                taken.insert(label);
                break;
            }
        }
        result.emplace_back(candidates[i].track_id, chosen);
    }
    std::sort(result.begin(), result.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return result;
}

Pipeline::Pipeline(const PipelineConfig& cfg, const RbfSvmModel* model)
    : cfg_(cfg), tracker_(make_tracker(cfg.tracker)) {
    if (model != nullptr) {
        model_ = *model;
        if (cfg.reid_min_conf) model_->min_conf = *cfg.reid_min_conf;
    }
}

FrameOutput Pipeline::process_frame(const FrameObservations& obs) {
    if (obs.frame <= last_frame_) {
        throw Error(Errc::out_of_order_frame,
                    "process_frame: frame " + std::to_string(obs.frame) +
                        " after frame " + std::to_string(last_frame_));
    }
    last_frame_ = obs.frame;
    current_frame_ = obs.frame;

    const StepResult step = tracker_->step(obs);
    std::map<std::int64_t, std::size_t> dets; // track id -> detection index
    for (const DetAssignment& a : step.assignments) {
        dets[a.track_id] = a.det_index;
    }
    for (const std::int64_t id : step.retired) last_point_.erase(id);

    if (model_) {
        rule_new_or_unknown(obs, dets);
        rule_duplicate_id(obs, dets);
        if (cfg_.speed_limit) {
            rule_speed_limit(obs, dets);
            // rule 3 may have re-introduced a duplicate label
            rule_duplicate_id(obs, dets);
        }
    } else {
        // No re-identifier: inherited duplicate labels are pruned silently,
        // eldest track keeps the label.
        std::map<std::string, std::vector<Track*>> holders;
        for (Track& t : tracker_->tracks()) {
            if (t.identity.is_known()) {
                holders[t.identity.label()].push_back(&t);
            }
        }
        for (auto& [label, ts] : holders) {
            if (ts.size() < 2) continue;
            std::sort(ts.begin(), ts.end(), [](const Track* a, const Track* b) {
                return a->track_id < b->track_id;
            });
            for (std::size_t i = 1; i < ts.size(); ++i) {
                ts[i]->identity = Identity::unknown();
            }
        }
    }

    FrameOutput out;
    out.frame = obs.frame;
    for (const DetAssignment& a : step.assignments) {
        const Track* t = tracker_->find_track(a.track_id);
        FrameEntry e;
        e.track_id = a.track_id;
        e.identity = t != nullptr ? t->identity : Identity::unknown();
        e.bbox = obs.detections[a.det_index].bbox;
        out.entries.push_back(e);
    }

    // remember where each detected track was, for the speed rule
    for (const DetAssignment& a : step.assignments) {
        last_point_[a.track_id] =
            representative_point(obs.detections[a.det_index]);
    }

    output_.frames.push_back(out);
    return out;
}

void Pipeline::rule_new_or_unknown(
    const FrameObservations& obs,
    const std::map<std::int64_t, std::size_t>& dets) {
    for (const auto& [track_id, det_index] : dets) {
        Track* t = tracker_->find_track(track_id);
        if (t == nullptr || t->identity.is_known()) continue;

        ReidEvent ev;
        ev.frame = current_frame_;
        ev.rule = ReidRule::new_or_unknown;
        ev.affected.push_back(track_id);

        ReidOutcome oc;
        oc.track_id = track_id;
        oc.old_identity = t->identity;
        const auto& emb = obs.detections[det_index].embedding;
        if (emb) {
            const Prediction p = classify(*model_, *emb);
            oc.new_identity = p.identity;
            oc.confidence = p.confidence;
            oc.classified = true;
            t->identity = p.identity;
            output_.reid_count += 1;
        } else {
            oc.new_identity = t->identity; // nothing to classify from
        }
        ev.outcomes.push_back(oc);
        output_.events.push_back(std::move(ev));
    }
}

void Pipeline::rule_duplicate_id(
    const FrameObservations& obs,
    const std::map<std::int64_t, std::size_t>& dets) {
    std::map<std::string, std::vector<std::int64_t>> holders;
    for (const Track& t : tracker_->tracks()) {
        if (t.identity.is_known()) {
            holders[t.identity.label()].push_back(t.track_id);
        }
    }

    for (auto& [label, ids] : holders) {
        if (ids.size() < 2) continue;
        std::sort(ids.begin(), ids.end());

        ReidEvent ev;
        ev.frame = current_frame_;
        ev.rule = ReidRule::duplicate_id;
        ev.affected = ids;

        // Labels pinned by tracks outside this duplicate set stay off-limits
        // so the resolution cannot mint a fresh duplicate.
        std::set<std::string> taken_elsewhere;
        for (const Track& t : tracker_->tracks()) {
            if (t.identity.is_known() && t.identity.label() != label) {
                taken_elsewhere.insert(t.identity.label());
            }
        }

        std::vector<DuplicateCandidate> candidates;
        std::map<std::int64_t, double> fresh_conf;
        for (const std::int64_t id : ids) {
            DuplicateCandidate c;
            c.track_id = id;
            const auto it = dets.find(id);
            if (it != dets.end() && obs.detections[it->second].embedding) {
                c.ranking = ranked_classify(
                    *model_, *obs.detections[it->second].embedding);
                fresh_conf[id] = c.ranking.front().second;
                output_.reid_count += 1;
            }
            candidates.push_back(std::move(c));
        }

        const auto resolved =
            resolve_duplicates(candidates, taken_elsewhere, model_->min_conf);
        for (const auto& [id, identity] : resolved) {
            Track* t = tracker_->find_track(id);
            ReidOutcome oc;
            oc.track_id = id;
            oc.old_identity = Identity::known(label);
            oc.new_identity = identity;
            const auto cit = fresh_conf.find(id);
            if (cit != fresh_conf.end()) {
                oc.confidence = cit->second;
                oc.classified = true;
            }
            ev.outcomes.push_back(oc);
            if (t != nullptr) t->identity = identity;
        }
        output_.events.push_back(std::move(ev));
    }
}

void Pipeline::rule_speed_limit(
    const FrameObservations& obs,
    const std::map<std::int64_t, std::size_t>& dets) {
    const double limit = *cfg_.speed_limit;
    for (const auto& [track_id, det_index] : dets) {
        const auto prev = last_point_.find(track_id);
        if (prev == last_point_.end()) continue; // first sighting, no speed
        const Point now = representative_point(obs.detections[det_index]);
        if (euclidean(prev->second, now) <= limit) continue;

        Track* t = tracker_->find_track(track_id);
        if (t == nullptr) continue;

        ReidEvent ev;
        ev.frame = current_frame_;
        ev.rule = ReidRule::speed_limit;
        ev.affected.push_back(track_id);

        ReidOutcome oc;
        oc.track_id = track_id;
        oc.old_identity = t->identity;
        const auto& emb = obs.detections[det_index].embedding;
        if (emb) {
            const Prediction p = classify(*model_, *emb);
            oc.new_identity = p.identity;
            oc.confidence = p.confidence;
            oc.classified = true;
            t->identity = p.identity;
            output_.reid_count += 1;
        } else {
            oc.new_identity = t->identity;
        }
        ev.outcomes.push_back(oc);
        output_.events.push_back(std::move(ev));
    }
}

TrackOutput run_stream(const std::vector<FrameObservations>& stream,
                       const PipelineConfig& cfg, const RbfSvmModel* model) {
    Pipeline p(cfg, model);
    for (const auto& obs : stream) p.process_frame(obs);
    return p.take_output();
}

} // namespace reidtrack
