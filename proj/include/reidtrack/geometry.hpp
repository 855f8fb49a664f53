// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reidtrack/error.hpp"

namespace reidtrack {

using Embedding = std::vector<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Axis-aligned box, top-left anchored, sizes >= 0.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }
    Point center() const { return {x + w / 2.0, y + h / 2.0}; }
};

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double conf = 0.0; // conf == 0 means the point was not detected

    bool visible() const { return conf > 0.0; }
};

// BODY_25 layout; index 1 is the neck.
inline constexpr std::size_t kKeypointCount = 25;
inline constexpr std::size_t kNeckIndex = 1;

struct Keypoints {
    std::array<Keypoint, kKeypointCount> points{};

    const Keypoint& neck() const { return points[kNeckIndex]; }
};

// Either a concrete person label or "we do not know who this is".
class Identity {
public:
    Identity() = default;

    static Identity unknown() { return Identity{}; }
    static Identity known(std::string label) {
        Identity id;
        id.label_ = std::move(label);
        return id;
    }

    bool is_known() const { return !label_.empty(); }
    const std::string& label() const { return label_; }

    friend bool operator==(const Identity& a, const Identity& b) {
        return a.label_ == b.label_;
    }
    friend bool operator!=(const Identity& a, const Identity& b) {
        return !(a == b);
    }

private:
    std::string label_; // empty = unknown
};

struct Detection {
    std::int64_t frame = 0;
    BBox bbox;
    std::optional<Keypoints> keypoints;
    double conf = 1.0;
    std::optional<Embedding> embedding;
};

struct FrameObservations {
    std::int64_t frame = 0;
    std::vector<Detection> detections;
};

// Tight box over visible keypoints, grown by pad_frac of the extent on
// each side. Throws no_visible_keypoints when every conf is zero.
BBox keypoints_to_bbox(const Keypoints& kps, double pad_frac);

inline constexpr double kDefaultKeypointPad = 0.10;

// Neck point when detected, otherwise the bbox center.
Point representative_point(const Detection& det);

} // namespace reidtrack
