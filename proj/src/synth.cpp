// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace reidtrack {

namespace {

constexpr double kMaxSpeed = 8.0;    // px/frame, documented scenario bound
constexpr double kCrossGap = 4.0;    // vertical gap at the closest approach
constexpr double kShiftSpeed = 3.0;  // lane-change speed for crossings
constexpr long kEdgeWalk = 60;       // frames spent walking to the edge

// Piecewise-linear trajectory over frame-keyed anchors; flat before the
// first and after the last anchor.
class AnchorTrack {
public:
    void set(long frame, double value) {
        const auto it = pts_.find(frame);
        if (it != pts_.end() && std::abs(it->second - value) > 1e-9) {
            throw Error(Errc::invalid_spec,
                        "generate: conflicting events at frame " +
                            std::to_string(frame));
        }
        pts_[frame] = value;
    }

    void require_free(long lo, long hi) const { // open interval
        for (const auto& [f, v] : pts_) {
            if (f > lo && f < hi) {
                throw Error(Errc::invalid_spec,
                            "generate: overlapping events near frame " +
                                std::to_string(f));
            }
        }
    }

    double at(long frame) const {
        if (pts_.empty()) return 0.0;
        auto hi = pts_.lower_bound(frame);
        if (hi == pts_.end()) return pts_.rbegin()->second;
        if (hi->first == frame || hi == pts_.begin()) return hi->second;
        const auto lo = std::prev(hi);
        const double t = static_cast<double>(frame - lo->first) /
                         static_cast<double>(hi->first - lo->first);
        return lo->second + t * (hi->second - lo->second);
    }

private:
    std::map<long, double> pts_;
};

struct AgentGeometry {
    double w = 0.0, h = 0.0;
    AnchorTrack x, y;
    std::vector<std::pair<long, long>> absent;   // [lo, hi)
    std::vector<std::pair<long, long>> occluded; // [lo, hi]
};

bool in_ranges(const std::vector<std::pair<long, long>>& half_open, long f) {
    for (const auto& [lo, hi] : half_open) {
        if (f >= lo && f < hi) return true;
    }
    return false;
}

void validate(const ScenarioSpec& s) {
    const auto fail = [](const std::string& why) {
        throw Error(Errc::invalid_spec, "generate: " + why);
    };
    if (s.agents < 1) fail("need at least one agent");
    if (s.frames < 1) fail("need at least one frame");
    if (s.width < 200 || s.height < 200) fail("image too small");
    if (s.det_noise < 0) fail("det_noise < 0");
    if (s.drop_rate < 0 || s.drop_rate >= 1) fail("drop_rate outside [0,1)");
    if (s.fp_rate < 0 || s.fp_rate > 1) fail("fp_rate outside [0,1]");
    if (s.emb.class_sep <= 0) fail("class_sep must be positive");
    if (s.emb.noise_std <= 0) fail("embedding noise_std must be positive");
    if (s.emb.dim < s.agents + 1) {
        fail("embedding dim must exceed the agent count");
    }
    for (const auto& c : s.crossings) {
        if (c.agents.size() != 2 || c.agents[0] == c.agents[1] ||
            c.agents[0] >= s.agents || c.agents[1] >= s.agents) {
            fail("crossing needs two distinct valid agents");
        }
        if (c.span_begin < 0 || c.span_end >= s.frames ||
            c.span_begin >= c.span_end) {
            fail("crossing span outside the scenario");
        }
        if (c.occlude_frames < 0 ||
            c.occlude_frames > c.span_end - c.span_begin) {
            fail("occlude_frames outside the crossing span");
        }
    }
    for (const auto& e : s.exits) {
        if (e.agent >= s.agents) fail("exit event names a missing agent");
        if (e.exit_frame <= 0 || e.reenter_frame >= s.frames ||
            e.exit_frame >= e.reenter_frame) {
            fail("exit window outside the scenario");
        }
    }
}

std::vector<AgentGeometry> build_trajectories(const ScenarioSpec& s) {
    std::vector<AgentGeometry> agents(s.agents);
    for (std::size_t i = 0; i < s.agents; ++i) {
        AgentGeometry& a = agents[i];
        a.w = 30.0 + 2.0 * static_cast<double>(i);
        a.h = 62.0 + 4.0 * static_cast<double>(i);
        const double lane = s.height * static_cast<double>(i + 1) /
                            static_cast<double>(s.agents + 1);
        const double x0 = 40.0 + 60.0 * static_cast<double>(i);
        const double x1 = s.width - 40.0 - 50.0 * static_cast<double>(i);
        if (x0 >= x1) {
            throw Error(Errc::invalid_spec,
                        "generate: too many agents for the image width");
        }
        // amble at up to 2 px/frame; short scenarios simply do not make it
        // across the room
        const double reach = 2.0 * static_cast<double>(s.frames - 1);
        a.x.set(0, x0);
        if (s.frames > 1) a.x.set(s.frames - 1, x0 + std::min(x1 - x0, reach));
        a.y.set(0, lane);
    }

    // chronological processing keeps "position at frame f" well-defined
    // when a later event starts from geometry an earlier one produced
    std::vector<ExitReenterEvent> exits = s.exits;
    std::sort(exits.begin(), exits.end(),
              [](const auto& a, const auto& b) {
                  return a.exit_frame < b.exit_frame;
              });
    std::vector<CrossingEvent> crossings = s.crossings;
    std::sort(crossings.begin(), crossings.end(),
              [](const auto& a, const auto& b) {
                  return a.span_begin < b.span_begin;
              });

    for (const auto& e : exits) {
        AgentGeometry& a = agents[e.agent];
        const long walk = std::min<long>(kEdgeWalk, e.exit_frame);
        const double from = a.x.at(e.exit_frame - walk);
        const double edge_in = a.w / 2.0 + 2.0; // just inside the left edge
        a.x.require_free(e.exit_frame - walk, e.reenter_frame);
        a.x.set(e.exit_frame - walk, from);
        a.x.set(e.exit_frame - 1, edge_in);
        a.x.set(e.reenter_frame, edge_in);
        a.absent.emplace_back(e.exit_frame, e.reenter_frame);
    }

    for (const auto& c : crossings) {
        AgentGeometry& a = agents[c.agents[0]];
        AgentGeometry& b = agents[c.agents[1]];
        const double xa = a.x.at(c.span_begin);
        const double xb = b.x.at(c.span_begin);
        a.x.require_free(c.span_begin, c.span_end);
        b.x.require_free(c.span_begin, c.span_end);
        a.x.set(c.span_begin, xa);
        a.x.set(c.span_end, xb);
        b.x.set(c.span_begin, xb);
        b.x.set(c.span_end, xa);

        // second agent drops into the first one's lane, 4 px off
        const double from_lane = b.y.at(c.span_begin);
        const double to_lane = a.y.at(c.span_begin) + kCrossGap;
        const long shift = static_cast<long>(
            std::ceil(std::abs(from_lane - to_lane) / kShiftSpeed));
        if (c.span_begin - shift < 0 || c.span_end + shift >= s.frames) {
            throw Error(Errc::invalid_spec,
                        "generate: no room for the crossing lane change");
        }
        b.y.require_free(c.span_begin - shift, c.span_end + shift);
        b.y.set(c.span_begin - shift, from_lane);
        b.y.set(c.span_begin, to_lane);
        b.y.set(c.span_end, to_lane);
        b.y.set(c.span_end + shift, from_lane);

        if (c.occlude_frames > 0) {
            const long mid = (c.span_begin + c.span_end) / 2;
            const long lo = mid - c.occlude_frames / 2;
            b.occluded.emplace_back(lo, lo + c.occlude_frames - 1);
        }
    }

    for (std::size_t i = 0; i < s.agents; ++i) {
        for (long f = 1; f < s.frames; ++f) {
            const double step =
                std::hypot(agents[i].x.at(f) - agents[i].x.at(f - 1),
                           agents[i].y.at(f) - agents[i].y.at(f - 1));
            if (step > kMaxSpeed + 1e-9) {
                throw Error(Errc::invalid_spec,
                            "generate: agent " + std::to_string(i) +
                                " exceeds the speed bound at frame " +
                                std::to_string(f));
            }
        }
    }
    return agents;
}

} // namespace

std::string agent_label(std::size_t index) {
    return "p" + std::to_string(index + 1);
}

ScenarioBundle generate(const ScenarioSpec& spec) {
    validate(spec);
    const std::vector<AgentGeometry> agents = build_trajectories(spec);

    // one engine per effect so toggling an effect never reshuffles another
    std::mt19937_64 noise_eng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
    std::mt19937_64 drop_eng(spec.seed ^ 0xBF58476D1CE4E5B9ULL);
    std::mt19937_64 fp_eng(spec.seed ^ 0x94D049BB133111EBULL);
    std::mt19937_64 emb_eng(spec.seed ^ 0xD6E8FEB86659FD93ULL);
    std::mt19937_64 gallery_eng(spec.seed ^ 0xA5A5A5A5DEADBEEFULL);
    std::mt19937_64 fp_emb_eng(spec.seed ^ 0x123456789ABCDEF0ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // class means sit on orthogonal axes; the scale makes the mean
    // inter-class distance class_sep * noise_std * sqrt(dim), i.e.
    // class_sep times the expected intra-class spread
    const double mean_scale = spec.emb.class_sep * spec.emb.noise_std *
                              std::sqrt(static_cast<double>(spec.emb.dim)) /
                              std::sqrt(2.0);
    const auto class_mean = [&](std::size_t axis, double scale = 1.0) {
        Embedding m(spec.emb.dim, 0.0);
        m[axis] = mean_scale * scale;
        return m;
    };
    const auto sample_embedding = [&](const Embedding& mean,
                                      std::mt19937_64& eng) {
        Embedding e = mean;
        for (double& v : e) v += gauss(eng) * spec.emb.noise_std;
        return e;
    };

    ScenarioBundle bundle;
    bundle.spec = spec;

    for (long f = 0; f < spec.frames; ++f) {
        FrameObservations obs;
        obs.frame = f;
        for (std::size_t i = 0; i < spec.agents; ++i) {
            const AgentGeometry& a = agents[i];
            if (in_ranges(a.absent, f)) continue;

            const double cx = a.x.at(f);
            const double cy = a.y.at(f);
            const BBox box{cx - a.w / 2.0, cy - a.h / 2.0, a.w, a.h};
            bundle.gt.frames[f].push_back({agent_label(i), box});

            bool hidden = false;
            for (const auto& [lo, hi] : a.occluded) {
                if (f >= lo && f <= hi) {
                    hidden = true;
                    break;
                }
            }
            if (hidden) continue;
            if (spec.drop_rate > 0.0 && unit(drop_eng) < spec.drop_rate) {
                continue;
            }

            Detection d;
            d.frame = f;
            d.bbox = box;
            if (spec.det_noise > 0.0) {
                d.bbox.x += gauss(noise_eng) * spec.det_noise;
                d.bbox.y += gauss(noise_eng) * spec.det_noise;
            }
            d.conf = 0.9;
            d.embedding = sample_embedding(class_mean(i), emb_eng);
            obs.detections.push_back(std::move(d));
        }

        if (spec.fp_rate > 0.0 && unit(fp_eng) < spec.fp_rate) {
            // spurious box in the empty strip above every lane, so it can
            // never be confused with a real person spatially
            Detection d;
            d.frame = f;
            const double cx = 30.0 + unit(fp_eng) * (spec.width - 60.0);
            const double cy = 15.0 + unit(fp_eng) * 20.0;
            d.bbox = BBox{cx - 15.0, cy - 20.0, 30.0, 40.0};
            d.conf = 0.5;
            d.embedding =
                sample_embedding(class_mean(spec.agents, 2.0), fp_emb_eng);
            obs.detections.push_back(std::move(d));
        }
        bundle.stream.push_back(std::move(obs));
    }

    for (std::size_t i = 0; i < spec.agents; ++i) {
        for (std::size_t k = 0; k < spec.gallery_per_agent; ++k) {
            bundle.gallery.push_back(
                {agent_label(i), sample_embedding(class_mean(i), gallery_eng)});
        }
    }
    return bundle;
}

ScenarioSpec preset(const std::string& name) {
    if (name == "normal_high") {
        // three people walking the room, one close pass, clean detector
        ScenarioSpec s;
        s.agents = 3;
        s.frames = 455;
        s.crossings = {{{0, 1}, 60, 140, 0}};
        s.det_noise = 0.0;
        s.drop_rate = 0.0;
        s.fp_rate = 0.0;
        s.emb = {32, 6.0, 1.0};
        s.seed = 1337;
        return s;
    }
    if (name == "hard_surveillance") {
        // five people; two leave the view and come back; both re-entries
        // are followed by a crossing with a short occlusion, and the
        // detector jitters, drops ~1% and hallucinates the odd box
        ScenarioSpec s;
        s.agents = 5;
        s.frames = 876;
        s.exits = {{1, 250, 350}, {3, 450, 620}};
        s.crossings = {{{0, 1}, 480, 520, 6}, {{2, 3}, 670, 730, 6}};
        s.det_noise = 0.6;
        s.drop_rate = 0.01;
        s.fp_rate = 0.02;
        s.emb = {64, 5.0, 1.0};
        s.seed = 424242;
        return s;
    }
    throw Error(Errc::unknown_preset, "preset: no scenario named " + name);
}

} // namespace reidtrack
