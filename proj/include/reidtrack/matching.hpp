// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "reidtrack/geometry.hpp"

namespace reidtrack {

// Dense row-major cost matrix. Rows index previous items, cols current ones.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> cells_;
};

// One-to-one matching result. pairs plus the unmatched lists partition
// both index sets.
struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;
};

double euclidean(const Point& a, const Point& b);

CostMatrix pairwise_distances(const std::vector<Point>& prev,
                              const std::vector<Point>& cur);

// Intersection over union; 0 when the union has no area.
double iou(const BBox& a, const BBox& b);

// Minimum-cost one-to-one matching of size min(rows, cols).
// Rectangular inputs are padded to square with a sentinel cost; pairs
// touching the padding come back as unmatched. Deterministic for a
// given matrix.
Assignment hungarian(const CostMatrix& cost);

// 1 - cos(u, v). Throws zero_vector when either norm is 0 and
// dim_mismatch when sizes differ.
double cosine_distance(const Embedding& u, const Embedding& v);

} // namespace reidtrack
