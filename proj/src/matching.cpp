// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reidtrack {

double euclidean(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

CostMatrix pairwise_distances(const std::vector<Point>& prev,
                              const std::vector<Point>& cur) {
    CostMatrix m(prev.size(), cur.size());
    for (std::size_t i = 0; i < prev.size(); ++i) {
        for (std::size_t j = 0; j < cur.size(); ++j) {
            m.at(i, j) = euclidean(prev[i], cur[j]);
        }
    }
    return m;
}

double iou(const BBox& a, const BBox& b) {
    const double ix =
        std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double iy =
        std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double cosine_distance(const Embedding& u, const Embedding& v) {
    if (u.size() != v.size()) {
        throw Error(Errc::dim_mismatch, "cosine_distance: dims differ");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw Error(Errc::zero_vector, "cosine_distance: zero-norm vector");
    }
    const double d = 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(d, 0.0, 2.0);
}

// Shortest-augmenting-path solver on the square matrix obtained by
// padding with a sentinel (10 x largest real cost + 1). Index scans run
// low to high, so equal-cost alternatives resolve to the lowest index.
Assignment hungarian(const CostMatrix& cost) {
    const std::size_t rows = cost.rows();
    const std::size_t cols = cost.cols();
    Assignment result;
    if (rows == 0 || cols == 0) {
        for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
        for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
        return result;
    }

    const std::size_t n = std::max(rows, cols);
    double max_real = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            max_real = std::max(max_real, cost.at(r, c));
        }
    }
    const double sentinel = 10.0 * max_real + 1.0;
    const auto cell = [&](std::size_t r, std::size_t c) {
        return (r < rows && c < cols) ? cost.at(r, c) : sentinel;
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            std::size_t j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cell(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<long> row_to_col(rows, -1);
    std::vector<char> col_matched(cols, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = match[j];
        if (i >= 1 && i <= rows && j <= cols) {
            row_to_col[i - 1] = static_cast<long>(j - 1);
            col_matched[j - 1] = 1;
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_to_col[r] >= 0) {
            result.pairs.emplace_back(r, static_cast<std::size_t>(row_to_col[r]));
        } else {
            result.unmatched_rows.push_back(r);
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_matched[c]) result.unmatched_cols.push_back(c);
    }
    return result;
}

} // namespace reidtrack
