#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "formulab/deepnet.hpp"
#include "formulab/matrix.hpp"
#include "formulab/random.hpp"

namespace oracles {

using formulab::Matrix;
using formulab::deepnet::NetworkParams;

// Plain scalar forward pass + MSE, written independently of deepnet.
inline double naive_loss(const NetworkParams& p, const Matrix& x, const Matrix& y) {
    double total = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<double> h(x.row(r).begin(), x.row(r).end());
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            const auto& layer = p.layers[l];
            std::vector<double> next(layer.weights.rows());
            for (std::size_t o = 0; o < next.size(); ++o) {
                double z = layer.biases[o];
                for (std::size_t i = 0; i < h.size(); ++i) z += layer.weights(o, i) * h[i];
                next[o] = (l + 1 == p.layers.size()) ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
            }
            h = std::move(next);
        }
        for (std::size_t o = 0; o < h.size(); ++o) total += (h[o] - y(r, o)) * (h[o] - y(r, o));
    }
    return total / static_cast<double>(x.rows() * y.cols());
}

// Central differences of naive_loss over every parameter, same layout as the
// analytic gradient.
inline NetworkParams finite_difference_gradient(NetworkParams p, const Matrix& x, const Matrix& y,
                                                double step = 1e-5) {
    NetworkParams g = p;
    auto probe = [&](double& slot, double& out) {
        const double keep = slot;
        slot = keep + step;
        const double up = naive_loss(p, x, y);
        slot = keep - step;
        const double down = naive_loss(p, x, y);
        slot = keep;
        out = (up - down) / (2.0 * step);
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t i = 0; i < p.layers[l].weights.data().size(); ++i)
            probe(p.layers[l].weights.data()[i], g.layers[l].weights.data()[i]);
        for (std::size_t i = 0; i < p.layers[l].biases.size(); ++i)
            probe(p.layers[l].biases[i], g.layers[l].biases[i]);
    }
    return g;
}

// Relative error with the denominator floored at `floor` so entries that are
// both essentially zero compare on an absolute scale.
inline double relative_error(double a, double b, double floor = 1e-4) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const NetworkParams& a, const NetworkParams& b, double floor = 1e-4) {
    double worst = 0.0;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        for (std::size_t i = 0; i < a.layers[l].weights.data().size(); ++i)
            worst = std::max(worst, relative_error(a.layers[l].weights.data()[i], b.layers[l].weights.data()[i], floor));
        for (std::size_t i = 0; i < a.layers[l].biases.size(); ++i)
            worst = std::max(worst, relative_error(a.layers[l].biases[i], b.layers[l].biases[i], floor));
    }
    return worst;
}

// Exhaustive search over all initial sets of a given size, maximizing the
// negative mean nearest-member distance of the remaining candidates.
inline std::vector<std::size_t> brute_force_initial_set(const std::function<double(std::size_t, std::size_t)>& dist,
                                                        const std::vector<std::size_t>& candidates,
                                                        std::size_t size) {
    std::vector<std::size_t> best;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<bool> mask(candidates.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
        std::vector<std::size_t> set;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) set.push_back(candidates[i]);
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) continue;
            double m = std::numeric_limits<double>::infinity();
            for (auto s : set) m = std::min(m, dist(candidates[i], s));
            total += m;
            ++count;
        }
        const double score = count ? -total / static_cast<double>(count) : 0.0;
        if (score > best_score) {
            best_score = score;
            best = set;
        }
    } while (std::prev_permutation(mask.begin(), mask.end()));
    std::sort(best.begin(), best.end());
    return best;
}

inline Matrix random_matrix(formulab::Rng& rng, std::size_t rows, std::size_t cols, double lo = 0.0,
                            double hi = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

}  // namespace oracles
