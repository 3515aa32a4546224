#include "doctest.h"

#include <cmath>

#include "formulab/deepnet.hpp"
#include "formulab/errors.hpp"
#include "formulab/random.hpp"
#include "support/oracles.hpp"

using namespace formulab;
using namespace formulab::deepnet;

namespace {

NetworkParams zero_params(const NetworkSpec& spec) {
    auto p = init(spec);
    for (auto& l : p.layers) {
        std::fill(l.weights.data().begin(), l.weights.data().end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
    return p;
}

NetworkSpec random_spec(Rng& rng, std::uint64_t seed) {
    NetworkSpec spec;
    spec.seed = seed;
    spec.layer_widths.push_back(1 + rng.below(6));
    const auto hidden = 1 + rng.below(3);
    for (std::uint64_t h = 0; h < hidden; ++h) spec.layer_widths.push_back(1 + rng.below(8));
    spec.layer_widths.push_back(1 + rng.below(4));
    return spec;
}

}  // namespace

TEST_CASE("init: zero biases, bounded weights, deterministic") {
    NetworkSpec spec{{7, 12, 5, 2}, 99};
    const auto a = init(spec);
    const auto b = init(spec);
    CHECK(a == b);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(spec.layer_widths[l] + spec.layer_widths[l + 1]));
        for (double w : a.layers[l].weights.data()) CHECK(std::abs(w) <= bound);
        for (double v : a.layers[l].biases) CHECK(v == 0.0);
        CHECK(a.layers[l].weights.rows() == spec.layer_widths[l + 1]);
        CHECK(a.layers[l].weights.cols() == spec.layer_widths[l]);
    }
    spec.seed = 100;
    CHECK_FALSE(init(spec) == a);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(init({{3}, 0}), ArgumentError);
    CHECK_THROWS_AS(init({{3, 0, 1}, 0}), ArgumentError);
}

TEST_CASE("forward: hand-evaluable cases") {
    NetworkSpec spec{{3, 4, 4, 2}, 1};
    auto p = zero_params(spec);
    for (double v : forward(p, std::vector<double>{1.0, -2.0, 3.0})) CHECK(v == 0.5);

    const double beta = 0.7;
    p.layers.back().biases = {beta, -beta};
    const auto out = forward(p, std::vector<double>{0.0, 0.0, 0.0});
    CHECK(out[0] == doctest::Approx(1.0 / (1.0 + std::exp(-beta))).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(1.0 / (1.0 + std::exp(beta))).epsilon(1e-15));

    CHECK_THROWS_AS(forward(p, std::vector<double>{1.0, 2.0}), ArgumentError);
}

TEST_CASE("forward: outputs stay finite and inside (0, 1)") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = init(random_spec(rng, 100 + trial));
        std::vector<double> x(p.input_width());
        for (auto& v : x) v = rng.uniform(-50.0, 50.0);
        for (double y : forward(p, x)) {
            CHECK(std::isfinite(y));
            CHECK(y > 0.0);
            CHECK(y < 1.0);
        }
    }
}

TEST_CASE("gradient: zero at a perfect fit") {
    NetworkSpec spec{{3, 5, 2}, 11};
    const auto p = init(spec);
    Rng rng(3);
    const Matrix x = oracles::random_matrix(rng, 6, 3);
    const Matrix y = forward_batch(p, x);
    const auto g = gradient(p, x, y);
    for (const auto& l : g.layers) {
        for (double v : l.weights.data()) CHECK(std::abs(v) <= 1e-12);
        for (double v : l.biases) CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("gradient: matches central finite differences on random networks") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = random_spec(rng, 500 + trial);
        const auto p = init(spec);
        const std::size_t n = 1 + rng.below(10);
        const Matrix x = oracles::random_matrix(rng, n, spec.input_width(), -1.0, 1.0);
        const Matrix y = oracles::random_matrix(rng, n, spec.output_width());
        const auto analytic = gradient(p, x, y);
        const auto numeric = oracles::finite_difference_gradient(p, x, y, 1e-5);
        CHECK(oracles::max_relative_error(analytic, numeric) < 1e-5);
    }
}

TEST_CASE("gradient: batch gradient is the mean of per-row gradients") {
    NetworkSpec spec{{4, 6, 3, 2}, 8};
    const auto p = init(spec);
    Rng rng(17);
    const Matrix x = oracles::random_matrix(rng, 7, 4);
    const Matrix y = oracles::random_matrix(rng, 7, 2);
    const auto batch = gradient(p, x, y);
    auto mean = batch;
    for (auto& l : mean.layers) {
        std::fill(l.weights.data().begin(), l.weights.data().end(), 0.0);
        std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const std::size_t idx[] = {r};
        const auto g = gradient(p, x.select_rows(idx), y.select_rows(idx));
        for (std::size_t l = 0; l < g.layers.size(); ++l) {
            for (std::size_t i = 0; i < g.layers[l].weights.data().size(); ++i)
                mean.layers[l].weights.data()[i] += g.layers[l].weights.data()[i] / 7.0;
            for (std::size_t i = 0; i < g.layers[l].biases.size(); ++i)
                mean.layers[l].biases[i] += g.layers[l].biases[i] / 7.0;
        }
    }
    for (std::size_t l = 0; l < batch.layers.size(); ++l) {
        for (std::size_t i = 0; i < batch.layers[l].weights.data().size(); ++i)
            CHECK(std::abs(batch.layers[l].weights.data()[i] - mean.layers[l].weights.data()[i]) <= 1e-12);
        for (std::size_t i = 0; i < batch.layers[l].biases.size(); ++i)
            CHECK(std::abs(batch.layers[l].biases[i] - mean.layers[l].biases[i]) <= 1e-12);
    }
}

TEST_CASE("gradient: shape errors") {
    const auto p = init({{3, 2, 1}, 0});
    CHECK_THROWS_AS(gradient(p, Matrix(0, 3), Matrix(0, 1)), ArgumentError);
    CHECK_THROWS_AS(gradient(p, Matrix(2, 4), Matrix(2, 1)), ArgumentError);
    CHECK_THROWS_AS(gradient(p, Matrix(2, 3), Matrix(2, 2)), ArgumentError);
}

TEST_CASE("train: zero epochs returns the initial network") {
    NetworkSpec spec{{2, 4, 1}, 42};
    Matrix x = Matrix::from_rows({{0.1, 0.2}, {0.3, 0.9}});
    Matrix y = Matrix::from_rows({{0.2}, {0.8}});
    const auto r = train(spec, {0.01, 0.8, 0}, x, y);
    CHECK(r.params == init(spec));
    REQUIRE(r.loss_trace.size() == 1);
    CHECK(r.loss_trace[0] == loss(init(spec), x, y));
}

TEST_CASE("train: momentum 0 is plain gradient descent") {
    NetworkSpec spec{{2, 3, 1}, 4};
    Matrix x = Matrix::from_rows({{0.1, 0.2}, {0.3, 0.9}, {0.5, 0.5}});
    Matrix y = Matrix::from_rows({{0.2}, {0.8}, {0.4}});
    const auto theta0 = init(spec);
    const auto g0 = gradient(theta0, x, y);
    const auto r = train(spec, {0.05, 0.0, 1}, x, y);
    for (std::size_t l = 0; l < g0.layers.size(); ++l) {
        for (std::size_t i = 0; i < g0.layers[l].weights.data().size(); ++i) {
            const double expected = theta0.layers[l].weights.data()[i] + (0.0 * 0.0 - 0.05 * g0.layers[l].weights.data()[i]);
            CHECK(r.params.layers[l].weights.data()[i] == expected);
        }
    }
}

TEST_CASE("train: two hand-computed updates on a single-parameter network") {
    // y = sigmoid(w x + b), both updated by hand.
    NetworkSpec spec{{1, 1}, 9};
    const Matrix x = Matrix::from_rows({{1.0}});
    const Matrix y = Matrix::from_rows({{0.9}});
    const double lr = 0.1, mu = 0.5;
    double w = init(spec).layers[0].weights(0, 0), b = 0.0, vw = 0.0, vb = 0.0;
    for (int step = 0; step < 2; ++step) {
        const double s = 1.0 / (1.0 + std::exp(-(w * 1.0 + b)));
        const double dz = 2.0 * (s - 0.9) * s * (1.0 - s);
        vw = mu * vw - lr * dz * 1.0;
        vb = mu * vb - lr * dz;
        w += vw;
        b += vb;
    }
    const auto r = train(spec, {lr, mu, 2}, x, y);
    CHECK(r.params.layers[0].weights(0, 0) == doctest::Approx(w).epsilon(1e-15));
    CHECK(r.params.layers[0].biases[0] == doctest::Approx(b).epsilon(1e-15));
}

TEST_CASE("train: loss decreases on a monotone 1-D target and trace has epochs + 1 entries") {
    Matrix x(20, 1), y(20, 1);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = static_cast<double>(i) / 19.0;
        y(i, 0) = 0.1 + 0.8 * x(i, 0) * x(i, 0);
    }
    auto p = preset(PresetName::ofdf_dnn, 1, 1, {3, 8, 300}, 7);
    const auto r = train(p.spec, p.config, x, y);
    CHECK(r.loss_trace.size() == 301);
    CHECK(r.loss_trace.back() < r.loss_trace.front());

    const auto again = train(p.spec, p.config, x, y);
    CHECK(again.params == r.params);
    CHECK(again.loss_trace == r.loss_trace);
}

TEST_CASE("train: rejects unscaled targets and bad configs") {
    NetworkSpec spec{{1, 2, 1}, 0};
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}});
    CHECK_THROWS_AS(train(spec, {}, x, Matrix::from_rows({{0.5}, {1.5}})), ArgumentError);
    CHECK_THROWS_AS(train(spec, {0.0, 0.8, 1}, x, Matrix::from_rows({{0.5}, {0.5}})), ArgumentError);
    CHECK_THROWS_AS(train(spec, {0.01, 1.0, 1}, x, Matrix::from_rows({{0.5}, {0.5}})), ArgumentError);
}

TEST_CASE("presets") {
    const auto ofdf = preset(PresetName::ofdf_dnn, 17);
    std::vector<std::size_t> widths{17};
    widths.insert(widths.end(), 9, 50);
    widths.push_back(1);
    CHECK(ofdf.spec.layer_widths == widths);
    CHECK(ofdf.spec.weight_layers() == 10);
    CHECK(ofdf.config.epochs == 900);
    CHECK(ofdf.config.learning_rate == 0.01);
    CHECK(ofdf.config.momentum == 0.8);

    const auto srmt = preset(PresetName::srmt_dnn, 17);
    CHECK(srmt.config.epochs == 2600);
    CHECK(srmt.spec.output_width() == 4);
    CHECK(srmt.spec.weight_layers() == 9);
    CHECK(srmt.spec.layer_widths[1] == 30);

    CHECK(parse_preset("SRMT-DNN") == PresetName::srmt_dnn);
    CHECK_THROWS_AS(parse_preset("CNN"), ArgumentError);

    const auto shrunk = preset(PresetName::ofdf_dnn, 5, 1, {3, std::nullopt, 200});
    CHECK(shrunk.spec.layer_widths == std::vector<std::size_t>{5, 50, 50, 50, 1});
    CHECK(shrunk.config.epochs == 200);
}

TEST_CASE("params json round trip is exact") {
    const auto p = init({{3, 4, 2}, 123});
    const auto text = to_json(p).dump();
    CHECK(params_from_json(nlohmann::json::parse(text)) == p);
}
