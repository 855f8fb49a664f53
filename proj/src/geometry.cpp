// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/geometry.hpp"

#include <algorithm>
#include <limits>

namespace reidtrack {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::no_visible_keypoints: return "NoVisibleKeypoints";
    case Errc::degenerate_box: return "DegenerateBox";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::dim_mismatch: return "DimMismatch";
    case Errc::single_class: return "SingleClass";
    case Errc::empty_gallery: return "EmptyGallery";
    case Errc::out_of_order_frame: return "OutOfOrderFrame";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::unknown_preset: return "UnknownPreset";
    case Errc::parse_error: return "ParseError";
    case Errc::non_monotonic_frame: return "NonMonotonicFrame";
    case Errc::embedding_dim_mismatch: return "EmbeddingDimMismatch";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::duplicate_label_in_frame: return "DuplicateLabelInFrame";
    case Errc::frame_range_mismatch: return "FrameRangeMismatch";
    case Errc::bad_config: return "BadConfig";
    case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

BBox keypoints_to_bbox(const Keypoints& kps, double pad_frac) {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const Keypoint& p : kps.points) {
        if (!p.visible()) continue;
        any = true;
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    if (!any) {
        throw Error(Errc::no_visible_keypoints,
                    "keypoints_to_bbox: every keypoint has conf = 0");
    }
    const double w = max_x - min_x;
    const double h = max_y - min_y;
    const double pad_x = pad_frac * w;
    const double pad_y = pad_frac * h;
    BBox box;
    box.x = min_x - pad_x;
    box.y = min_y - pad_y;
    box.w = std::max(0.0, w + 2.0 * pad_x);
    box.h = std::max(0.0, h + 2.0 * pad_y);
    return box;
}

Point representative_point(const Detection& det) {
    if (det.keypoints && det.keypoints->neck().visible()) {
        const Keypoint& neck = det.keypoints->neck();
        return {neck.x, neck.y};
    }
    return det.bbox.center();
}

} // namespace reidtrack
