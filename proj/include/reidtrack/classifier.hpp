// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "reidtrack/geometry.hpp"

namespace reidtrack {

struct GallerySample {
    std::string label;
    Embedding embedding;
};

/**
 * RBF kernel with the length-scale parameterization:
 * k(x, x') = exp(-||x - x'||^2 / (2 * gamma^2)).
 * Throws Errc::dim_mismatch on unequal dimensions.
 */
double rbf_kernel(const Embedding& x, const Embedding& xp, double gamma);

// One binary one-vs-rest machine: f(e) = sum_i dual_i * k(sv_i, e) + bias,
// dual_i = alpha_i * y_i with |alpha_i| <= C.
struct BinaryMachine {
    std::vector<Embedding> support_vectors;
    std::vector<double> dual_coefs;
    double bias = 0.0;
};

struct RbfSvmModel {
    std::vector<std::string> classes; // first-appearance order of the gallery
    std::vector<BinaryMachine> machines; // parallel to classes
    std::size_t dim = 0;
    double gamma = 1.0;
    double c = 10.0;
    double min_conf = 0.35;
};

struct TrainOptions {
    double gamma = 0.0; // <= 0 selects the median pairwise-distance heuristic
    double c = 10.0;
    double min_conf = 0.35;
    double tol = 1e-3;   // KKT stopping tolerance for SMO
    long max_iter = 200000; // safety cap per binary problem
};

/**
 * Trains one soft-margin SVM per class (one-vs-rest) with SMO using
 * maximal-violating-pair working sets; ties break to the lowest sample
 * index, so the result is deterministic for a given sample order.
 * Throws Errc::empty_gallery / Errc::single_class / Errc::dim_mismatch.
 */
RbfSvmModel train_classifier(const std::vector<GallerySample>& samples,
                             const TrainOptions& opts = {});

struct Prediction {
    Identity identity;
    double confidence = 0.0;
};

// Raw per-class decision values, ordered like model.classes.
std::vector<double> decision_values(const RbfSvmModel& m, const Embedding& e);

// All classes with their softmax probabilities, highest first (ties keep
// class order). classify() is the head of this list plus the threshold.
std::vector<std::pair<std::string, double>> ranked_classify(
    const RbfSvmModel& m, const Embedding& e);

/**
 * Softmax over the per-class decision values; returns the argmax label when
 * its softmax probability clears model.min_conf, otherwise Unknown with
 * that probability. Throws Errc::dim_mismatch.
 */
Prediction classify(const RbfSvmModel& m, const Embedding& e);

std::vector<Prediction> classify_crop_batch(const RbfSvmModel& m,
                                            const std::vector<Embedding>& es);

// Median of all pairwise sample distances; 1.0 when degenerate (fewer than
// two samples or all points coincident). Used when TrainOptions.gamma <= 0.
double median_pairwise_distance(const std::vector<GallerySample>& samples);

} // namespace reidtrack
