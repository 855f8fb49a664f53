// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "reidtrack/matching.hpp"
#include "checks.hpp"

using namespace reidtrack;
using testutil::errc_of;

namespace {

double assignment_cost(const CostMatrix& m, const Assignment& a) {
    double total = 0.0;
    for (const auto& [r, c] : a.pairs) total += m.at(r, c);
    return total;
}

// Exhaustive minimum over all injective row->col maps of size min(r, c).
// Only usable for small matrices; this is the reference the solver is
// checked against.
double brute_force_min_cost(const CostMatrix& m) {
    const bool transpose = m.rows() > m.cols();
    const std::size_t small = transpose ? m.cols() : m.rows();
    const std::size_t large = transpose ? m.rows() : m.cols();
    auto cell = [&](std::size_t s, std::size_t l) {
        return transpose ? m.at(l, s) : m.at(s, l);
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(small);
    std::vector<bool> used(large, false);
    auto rec = [&](auto&& self, std::size_t s, double acc) -> void {
        if (acc >= best) return;
        if (s == small) {
            best = acc;
            return;
        }
        for (std::size_t l = 0; l < large; ++l) {
            if (used[l]) continue;
            used[l] = true;
            self(self, s + 1, acc + cell(s, l));
            used[l] = false;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

bool valid_assignment(const CostMatrix& m, const Assignment& a) {
    std::vector<int> row_seen(m.rows(), 0), col_seen(m.cols(), 0);
    for (const auto& [r, c] : a.pairs) {
        if (r >= m.rows() || c >= m.cols()) return false;
        ++row_seen[r];
        ++col_seen[c];
    }
    for (const std::size_t r : a.unmatched_rows) ++row_seen[r];
    for (const std::size_t c : a.unmatched_cols) ++col_seen[c];
    // every index appears exactly once across pairs + unmatched
    return std::all_of(row_seen.begin(), row_seen.end(),
                       [](int n) { return n == 1; }) &&
           std::all_of(col_seen.begin(), col_seen.end(),
                       [](int n) { return n == 1; });
}

} // namespace

TEST_CASE("euclidean distance") {
    CHECK(euclidean({0.0, 0.0}, {0.0, 0.0}) == 0.0);
    CHECK(euclidean({0.0, 0.0}, {3.0, 4.0}) == 5.0);
    CHECK(euclidean({1.0, 2.0}, {-2.0, 6.0}) == 5.0);
    CHECK(euclidean({-2.0, 6.0}, {1.0, 2.0}) == 5.0); // symmetric
}

TEST_CASE("pairwise_distances shapes and cells") {
    SUBCASE("empty prev gives a 0 x n matrix") {
        const CostMatrix m = pairwise_distances({}, {{1.0, 1.0}});
        CHECK(m.rows() == 0);
        CHECK(m.cols() == 1);
    }
    SUBCASE("single pair") {
        const CostMatrix m = pairwise_distances({{0.0, 0.0}}, {{3.0, 4.0}});
        CHECK(m.rows() == 1);
        CHECK(m.cols() == 1);
        CHECK(m.at(0, 0) == 5.0);
    }
    SUBCASE("cells agree with euclidean") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> coord(-100.0, 100.0);
        std::vector<Point> prev(4), cur(3);
        for (auto& p : prev) p = {coord(rng), coord(rng)};
        for (auto& p : cur) p = {coord(rng), coord(rng)};
        const CostMatrix m = pairwise_distances(prev, cur);
        REQUIRE(m.rows() == 4);
        REQUIRE(m.cols() == 3);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(m.at(r, c) == euclidean(prev[r], cur[c]));
    }
}

TEST_CASE("iou basics") {
    const BBox a{0.0, 0.0, 10.0, 10.0};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, {20.0, 20.0, 5.0, 5.0}) == 0.0);
    CHECK(iou(a, {10.0, 0.0, 10.0, 10.0}) == 0.0); // touching edges, no area
    CHECK(iou(a, {5.0, 0.0, 10.0, 10.0}) == doctest::Approx(1.0 / 3.0));
    CHECK(iou({5.0, 0.0, 10.0, 10.0}, a) == doctest::Approx(1.0 / 3.0));
    CHECK(iou({0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("iou agrees with a unit-cell rasterization") {
    // Count unit cells of [0,20)^2 inside each box; for integer-aligned
    // boxes the ratio of counts is exactly the area ratio.
    auto raster_iou = [](const BBox& a, const BBox& b) {
        long inter = 0, uni = 0;
        for (int x = 0; x < 20; ++x) {
            for (int y = 0; y < 20; ++y) {
                auto inside = [&](const BBox& box) {
                    return x >= box.x && x + 1 <= box.right() && y >= box.y &&
                           y + 1 <= box.bottom();
                };
                const bool in_a = inside(a), in_b = inside(b);
                if (in_a && in_b) ++inter;
                if (in_a || in_b) ++uni;
            }
        }
        return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
    };
    const BBox a{0.0, 0.0, 10.0, 10.0};
    const BBox b{5.0, 0.0, 10.0, 10.0};
    CHECK(raster_iou(a, b) == doctest::Approx(50.0 / 150.0));
    CHECK(iou(a, b) == doctest::Approx(raster_iou(a, b)));

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pos(0, 12), len(1, 8);
    for (int trial = 0; trial < 100; ++trial) {
        const BBox u{double(pos(rng)), double(pos(rng)), double(len(rng)),
                     double(len(rng))};
        const BBox v{double(pos(rng)), double(pos(rng)), double(len(rng)),
                     double(len(rng))};
        CHECK(iou(u, v) == doctest::Approx(raster_iou(u, v)).epsilon(1e-12));
    }
}

TEST_CASE("iou bounds and symmetry on random boxes") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> pos(-50.0, 50.0);
    std::uniform_real_distribution<double> len(0.0, 40.0);
    for (int trial = 0; trial < 200; ++trial) {
        const BBox u{pos(rng), pos(rng), len(rng), len(rng)};
        const BBox v{pos(rng), pos(rng), len(rng), len(rng)};
        const double d = iou(u, v);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(d == iou(v, u));
    }
}

TEST_CASE("cosine_distance") {
    const Embedding u{1.0, 2.0, 3.0};
    CHECK(cosine_distance(u, u) == doctest::Approx(0.0));
    CHECK(cosine_distance({1.0, 0.0}, {0.0, 5.0}) == doctest::Approx(1.0));
    CHECK(cosine_distance({1.0, 2.0}, {-1.0, -2.0}) == doctest::Approx(2.0));
    CHECK(cosine_distance({2.0, 0.0}, {7.0, 0.0}) ==
          doctest::Approx(0.0)); // scale invariant
    CHECK(errc_of([&] { cosine_distance({0.0, 0.0}, {1.0, 0.0}); }) ==
          Errc::zero_vector);
    CHECK(errc_of([&] { cosine_distance({1.0, 0.0}, {1.0, 0.0, 0.0}); }) ==
          Errc::dim_mismatch);
}

TEST_CASE("hungarian hand examples") {
    SUBCASE("diagonal zeros pick the identity") {
        CostMatrix m(3, 3, 1.0);
        for (std::size_t i = 0; i < 3; ++i) m.at(i, i) = 0.0;
        const Assignment a = hungarian(m);
        REQUIRE(a.pairs.size() == 3);
        CHECK(assignment_cost(m, a) == 0.0);
        for (const auto& [r, c] : a.pairs) CHECK(r == c);
        CHECK(a.unmatched_rows.empty());
        CHECK(a.unmatched_cols.empty());
    }
    SUBCASE("3x3 with a known optimum of 5") {
        CostMatrix m(3, 3);
        const double rows[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) m.at(r, c) = rows[r][c];
        const Assignment a = hungarian(m);
        CHECK(assignment_cost(m, a) == 5.0);
        CHECK(brute_force_min_cost(m) == 5.0);
    }
    SUBCASE("rectangular leaves the extra column unmatched") {
        CostMatrix m(2, 3);
        const double rows[2][3] = {{1, 9, 9}, {9, 9, 1}};
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 3; ++c) m.at(r, c) = rows[r][c];
        const Assignment a = hungarian(m);
        REQUIRE(a.pairs.size() == 2);
        CHECK(assignment_cost(m, a) == 2.0);
        REQUIRE(a.unmatched_cols.size() == 1);
        CHECK(a.unmatched_cols[0] == 1);
        CHECK(a.unmatched_rows.empty());
    }
    SUBCASE("empty shapes") {
        CHECK(hungarian(CostMatrix{}).pairs.empty());
        const Assignment a = hungarian(CostMatrix(0, 3));
        CHECK(a.pairs.empty());
        CHECK(a.unmatched_cols.size() == 3);
        const Assignment b = hungarian(CostMatrix(3, 0));
        CHECK(b.pairs.empty());
        CHECK(b.unmatched_rows.size() == 3);
    }
}

TEST_CASE("hungarian matches brute force on random matrices") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> cost(0.0, 100.0);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t r = 1 + rng() % 6;
        const std::size_t c = 1 + rng() % 6;
        CostMatrix m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m.at(i, j) = cost(rng);
        const Assignment a = hungarian(m);
        CHECK(valid_assignment(m, a));
        CHECK(a.pairs.size() == std::min(r, c));
        CHECK(assignment_cost(m, a) ==
              doctest::Approx(brute_force_min_cost(m)).epsilon(1e-9));
    }
}

TEST_CASE("hungarian is invariant to a constant shift of one row") {
    // Adding a constant to a whole row raises every full assignment's cost
    // by that constant (square case), so the optimal pairing survives.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> cost(0.0, 50.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        CostMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m.at(i, j) = cost(rng);
        CostMatrix shifted = m;
        const std::size_t row = rng() % n;
        for (std::size_t j = 0; j < n; ++j) shifted.at(row, j) += 13.5;
        const double base = assignment_cost(m, hungarian(m));
        const double moved = assignment_cost(shifted, hungarian(shifted));
        CHECK(moved == doctest::Approx(base + 13.5).epsilon(1e-9));
    }
}

TEST_CASE("hungarian is deterministic") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> cost(0.0, 10.0);
    CostMatrix m(5, 7);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 7; ++j) m.at(i, j) = cost(rng);
    const Assignment a = hungarian(m);
    const Assignment b = hungarian(m);
    CHECK(a.pairs == b.pairs);
    CHECK(a.unmatched_rows == b.unmatched_rows);
    CHECK(a.unmatched_cols == b.unmatched_cols);
}
