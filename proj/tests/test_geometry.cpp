// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "reidtrack/geometry.hpp"
#include "checks.hpp"

using namespace reidtrack;
using testutil::errc_of;

namespace {

Keypoints kps_from(std::initializer_list<Keypoint> pts) {
    Keypoints k;
    std::size_t i = 0;
    for (const Keypoint& p : pts) k.points[i++] = p;
    return k;
}

bool same_box(const BBox& a, const BBox& b, double eps = 1e-12) {
    return std::abs(a.x - b.x) < eps && std::abs(a.y - b.y) < eps &&
           std::abs(a.w - b.w) < eps && std::abs(a.h - b.h) < eps;
}

} // namespace

TEST_CASE("bbox accessors") {
    const BBox b{10.0, 20.0, 30.0, 40.0};
    CHECK(b.right() == 40.0);
    CHECK(b.bottom() == 60.0);
    CHECK(b.area() == 1200.0);
    CHECK(b.center().x == 25.0);
    CHECK(b.center().y == 40.0);
}

TEST_CASE("keypoints_to_bbox on a single visible point is a zero-size box") {
    const auto k = kps_from({{10.0, 20.0, 0.9}});
    const BBox b = keypoints_to_bbox(k, 0.0);
    CHECK(same_box(b, {10.0, 20.0, 0.0, 0.0}));
}

TEST_CASE("keypoints_to_bbox is the tight hull of the visible points") {
    const auto k =
        kps_from({{0.0, 0.0, 0.5}, {10.0, 0.0, 0.5}, {10.0, 30.0, 0.5}});
    const BBox b = keypoints_to_bbox(k, 0.0);
    CHECK(same_box(b, {0.0, 0.0, 10.0, 30.0}));
}

TEST_CASE("keypoints_to_bbox pads each side by pad_frac of the extent") {
    const auto k = kps_from({{0.0, 0.0, 1.0}, {10.0, 30.0, 1.0}});
    const BBox b = keypoints_to_bbox(k, 0.1);
    CHECK(same_box(b, {-1.0, -3.0, 12.0, 36.0}));
}

TEST_CASE("keypoints_to_bbox ignores zero-confidence points") {
    auto k = kps_from({{0.0, 0.0, 1.0}, {10.0, 30.0, 1.0}});
    k.points[7] = {1000.0, -1000.0, 0.0}; // invisible outlier must not count
    const BBox b = keypoints_to_bbox(k, 0.0);
    CHECK(same_box(b, {0.0, 0.0, 10.0, 30.0}));
}

TEST_CASE("keypoints_to_bbox with no visible points throws") {
    const Keypoints k{}; // all conf 0
    CHECK(errc_of([&] { keypoints_to_bbox(k, 0.1); }) ==
          Errc::no_visible_keypoints);
}

TEST_CASE("keypoints_to_bbox translation equivariance") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    for (int trial = 0; trial < 50; ++trial) {
        Keypoints k;
        for (std::size_t i = 0; i < kKeypointCount; ++i) {
            k.points[i] = {coord(rng), coord(rng), i % 3 == 0 ? 0.0 : 0.8};
        }
        const double dx = coord(rng), dy = coord(rng);
        Keypoints shifted = k;
        for (auto& p : shifted.points) {
            p.x += dx;
            p.y += dy;
        }
        const BBox a = keypoints_to_bbox(k, 0.1);
        const BBox b = keypoints_to_bbox(shifted, 0.1);
        CHECK(std::abs(b.x - (a.x + dx)) < 1e-9);
        CHECK(std::abs(b.y - (a.y + dy)) < 1e-9);
        CHECK(std::abs(b.w - a.w) < 1e-9);
        CHECK(std::abs(b.h - a.h) < 1e-9);
    }
}

TEST_CASE("keypoints_to_bbox contains every visible point, any pad") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> coord(0.0, 640.0);
    std::uniform_real_distribution<double> pad(0.0, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        Keypoints k;
        bool any = false;
        for (std::size_t i = 0; i < kKeypointCount; ++i) {
            const bool vis = rng() % 4 != 0;
            k.points[i] = {coord(rng), coord(rng), vis ? 1.0 : 0.0};
            any |= vis;
        }
        if (!any) k.points[0].conf = 1.0;
        const double p = pad(rng);
        const BBox b = keypoints_to_bbox(k, p);
        for (const Keypoint& pt : k.points) {
            if (!pt.visible()) continue;
            CHECK(pt.x >= b.x - 1e-9);
            CHECK(pt.x <= b.right() + 1e-9);
            CHECK(pt.y >= b.y - 1e-9);
            CHECK(pt.y <= b.bottom() + 1e-9);
        }
    }
}

TEST_CASE("representative_point prefers the neck") {
    Detection d;
    d.bbox = {0.0, 0.0, 100.0, 100.0};
    Keypoints k;
    k.points[kNeckIndex] = {50.0, 60.0, 0.9};
    d.keypoints = k;
    const Point p = representative_point(d);
    CHECK(p.x == 50.0);
    CHECK(p.y == 60.0);
}

TEST_CASE("representative_point falls back to the box center") {
    Detection d;
    d.bbox = {0.0, 0.0, 10.0, 20.0};

    SUBCASE("no keypoints at all") {
        const Point p = representative_point(d);
        CHECK(p.x == 5.0);
        CHECK(p.y == 10.0);
    }
    SUBCASE("neck present but not detected") {
        Keypoints k;
        k.points[kNeckIndex] = {50.0, 60.0, 0.0}; // conf 0: not detected
        d.keypoints = k;
        d.bbox = {10.0, 10.0, 4.0, 4.0};
        const Point p = representative_point(d);
        CHECK(p.x == 12.0);
        CHECK(p.y == 12.0);
    }
}

TEST_CASE("representative point of a keypoint detection lies in its hull box") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coord(0.0, 480.0);
    for (int trial = 0; trial < 30; ++trial) {
        Keypoints k;
        for (std::size_t i = 0; i < kKeypointCount; ++i) {
            k.points[i] = {coord(rng), coord(rng), 1.0};
        }
        Detection d;
        d.keypoints = k;
        d.bbox = keypoints_to_bbox(k, kDefaultKeypointPad);
        const Point p = representative_point(d);
        CHECK(p.x >= d.bbox.x);
        CHECK(p.x <= d.bbox.right());
        CHECK(p.y >= d.bbox.y);
        CHECK(p.y <= d.bbox.bottom());
    }
}

TEST_CASE("identity equality and state") {
    CHECK(!Identity::unknown().is_known());
    CHECK(Identity::known("p1").is_known());
    CHECK(Identity::known("p1") == Identity::known("p1"));
    CHECK(Identity::known("p1") != Identity::known("p2"));
    CHECK(Identity::known("p1") != Identity::unknown());
    CHECK(Identity{} == Identity::unknown());
}
