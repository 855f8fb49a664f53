// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reidtrack {

namespace {

double squared_distance(const Embedding& a, const Embedding& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/**
 * Sequential minimal optimization for one binary problem
 *   min 1/2 a^T Q a - e^T a,  0 <= a <= C,  y^T a = 0,
 * with Q_ij = y_i y_j K_ij. Working-set selection is the maximal violating
 * pair; both argmax scans run in index order so ties go to the lowest index.
 */
struct SmoResult {
    std::vector<double> alpha;
    double rho = 0.0;
};

SmoResult solve_binary(const std::vector<std::vector<double>>& kernel,
                       const std::vector<int>& y, double c, double tol,
                       long max_iter) {
    const std::size_t n = y.size();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // gradient of the dual objective
    const double tau = 1e-12;

    const auto q = [&](std::size_t a, std::size_t b) {
        return y[a] * y[b] * kernel[a][b];
    };

    for (long iter = 0; iter < max_iter; ++iter) {
        // i maximizes -y_t G_t over I_up; j minimizes it over I_low
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up =
                (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low =
                (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0);
            const double v = -y[t] * grad[t];
            if (in_up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin <= tol) break;

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = kernel[i][i] + kernel[j][j] + 2.0 * kernel[i][j];
            if (quad <= 0.0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            double quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            if (quad <= 0.0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) break; // numerically stuck pair
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += q(t, i) * dai + q(t, j) * daj;
        }
    }

    // Bias from the KKT multipliers: average y*G over free vectors, else the
    // midpoint of the bound-implied bracket.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    SmoResult out;
    out.alpha = std::move(alpha);
    out.rho = n_free > 0 ? sum_free / static_cast<double>(n_free)
                         : (ub + lb) / 2.0;
    return out;
}

} // namespace

double rbf_kernel(const Embedding& x, const Embedding& xp, double gamma) {
    if (x.size() != xp.size()) {
        throw Error(Errc::dim_mismatch, "rbf_kernel: dims differ");
    }
    return std::exp(-squared_distance(x, xp) / (2.0 * gamma * gamma));
}

double median_pairwise_distance(const std::vector<GallerySample>& samples) {
    std::vector<double> d;
    d.reserve(samples.size() * (samples.size() - 1) / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            d.push_back(
                std::sqrt(squared_distance(samples[i].embedding,
                                           samples[j].embedding)));
        }
    }
    if (d.empty()) return 1.0;
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<long>(mid), d.end());
    const double m = d[mid];
    return m > 0.0 ? m : 1.0;
}

RbfSvmModel train_classifier(const std::vector<GallerySample>& samples,
                             const TrainOptions& opts) {
    if (samples.empty()) {
        throw Error(Errc::empty_gallery, "train_classifier: no samples");
    }
    const std::size_t dim = samples[0].embedding.size();
    std::vector<std::string> classes;
    for (const auto& s : samples) {
        if (s.embedding.size() != dim) {
            throw Error(Errc::dim_mismatch,
                        "train_classifier: sample dims differ");
        }
        if (std::find(classes.begin(), classes.end(), s.label) ==
            classes.end()) {
            classes.push_back(s.label);
        }
    }
    if (classes.size() < 2) {
        throw Error(Errc::single_class,
                    "train_classifier: need at least two distinct labels");
    }

    RbfSvmModel model;
    model.classes = classes;
    model.dim = dim;
    model.gamma =
        opts.gamma > 0.0 ? opts.gamma : median_pairwise_distance(samples);
    model.c = opts.c;
    model.min_conf = opts.min_conf;

    const std::size_t n = samples.size();
    std::vector<std::vector<double>> kernel(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double k = rbf_kernel(samples[i].embedding,
                                        samples[j].embedding, model.gamma);
            kernel[i][j] = k;
            kernel[j][i] = k;
        }
    }

    for (const auto& cls : classes) {
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = samples[i].label == cls ? 1 : -1;
        }
        const SmoResult sol =
            solve_binary(kernel, y, opts.c, opts.tol, opts.max_iter);
        BinaryMachine machine;
        machine.bias = -sol.rho;
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.alpha[i] > 0.0) {
                machine.support_vectors.push_back(samples[i].embedding);
                machine.dual_coefs.push_back(sol.alpha[i] * y[i]);
            }
        }
        model.machines.push_back(std::move(machine));
    }
    return model;
}

std::vector<double> decision_values(const RbfSvmModel& m, const Embedding& e) {
    if (e.size() != m.dim) {
        throw Error(Errc::dim_mismatch, "classify: embedding dim differs");
    }
    std::vector<double> values;
    values.reserve(m.machines.size());
    for (const auto& machine : m.machines) {
        double f = machine.bias;
        for (std::size_t i = 0; i < machine.support_vectors.size(); ++i) {
            f += machine.dual_coefs[i] *
                 rbf_kernel(machine.support_vectors[i], e, m.gamma);
        }
        values.push_back(f);
    }
    return values;
}

std::vector<std::pair<std::string, double>> ranked_classify(
    const RbfSvmModel& m, const Embedding& e) {
    const std::vector<double> d = decision_values(m, e);
    double dmax = d[0];
    for (const double v : d) dmax = std::max(dmax, v);
    double denom = 0.0;
    for (const double v : d) denom += std::exp(v - dmax);

    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        ranked.emplace_back(m.classes[i], std::exp(d[i] - dmax) / denom);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                         return a.second > b.second;
                     });
    return ranked;
}

Prediction classify(const RbfSvmModel& m, const Embedding& e) {
    const auto ranked = ranked_classify(m, e);
    Prediction p;
    p.confidence = ranked.front().second;
    p.identity = p.confidence >= m.min_conf
                     ? Identity::known(ranked.front().first)
                     : Identity::unknown();
    return p;
}

std::vector<Prediction> classify_crop_batch(const RbfSvmModel& m,
                                            const std::vector<Embedding>& es) {
    std::vector<Prediction> out;
    out.reserve(es.size());
    for (const auto& e : es) out.push_back(classify(m, e));
    return out;
}

} // namespace reidtrack
