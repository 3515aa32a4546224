#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "formulab/baselines.hpp"
#include "formulab/errors.hpp"
#include "formulab/random.hpp"
#include "support/oracles.hpp"

using namespace formulab;
using namespace formulab::baselines;

namespace {

struct Planted {
    Matrix x;
    std::vector<double> y;
    std::vector<double> w;
    double b = 0.0;
};

Planted planted(Rng& rng, std::size_t n, std::size_t p) {
    Planted out{oracles::random_matrix(rng, n, p, -2.0, 2.0), std::vector<double>(n), std::vector<double>(p),
                rng.uniform(-3.0, 3.0)};
    for (auto& v : out.w) v = rng.uniform(-5.0, 5.0);
    for (std::size_t r = 0; r < n; ++r) {
        double s = out.b;
        for (std::size_t c = 0; c < p; ++c) s += out.w[c] * out.x(r, c);
        out.y[r] = s;
    }
    return out;
}

const LinearModel& linear(const TrainedRegressor& m) { return std::get<LinearModel>(m.model()); }

}  // namespace

TEST_CASE("mlr: two-point line") {
    const auto m = fit_mlr(Matrix::from_rows({{1}, {2}}), std::vector<double>{3, 5});
    CHECK(linear(m).coefficients[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(linear(m).intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(fit_mlr(Matrix(0, 1), std::vector<double>{}), ArgumentError);
    CHECK_THROWS_AS(fit_mlr(Matrix(2, 1), std::vector<double>{1}), ArgumentError);
}

TEST_CASE("mlr: planted coefficient recovery and held-out rmse") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t p = 1 + rng.below(8);
        const auto d = planted(rng, p + 5 + rng.below(30), p);
        const auto m = fit_mlr(d.x, d.y);
        for (std::size_t c = 0; c < p; ++c) CHECK(std::abs(linear(m).coefficients[c] - d.w[c]) < 1e-8);
        CHECK(std::abs(linear(m).intercept - d.b) < 1e-8);
        const auto held = oracles::random_matrix(rng, 10, p, -2.0, 2.0);
        double se = 0.0;
        for (std::size_t r = 0; r < 10; ++r) {
            double truth = d.b;
            for (std::size_t c = 0; c < p; ++c) truth += d.w[c] * held(r, c);
            se += std::pow(m.predict(held.row(r))[0] - truth, 2);
        }
        CHECK(std::sqrt(se / 10.0) < 1e-8);
    }
}

TEST_CASE("mlr: duplicated column gives finite min-norm solution with unchanged predictions") {
    Rng rng(3);
    const auto d = planted(rng, 20, 3);
    Matrix dup(20, 4);
    for (std::size_t r = 0; r < 20; ++r) {
        for (std::size_t c = 0; c < 3; ++c) dup(r, c) = d.x(r, c);
        dup(r, 3) = d.x(r, 1);
    }
    const auto base = fit_mlr(d.x, d.y);
    const auto m = fit_mlr(dup, d.y);
    for (double c : linear(m).coefficients) CHECK(std::isfinite(c));
    CHECK(linear(m).coefficients[1] == doctest::Approx(linear(m).coefficients[3]).epsilon(1e-8));
    for (std::size_t r = 0; r < 20; ++r)
        CHECK(std::abs(m.predict(dup.row(r))[0] - base.predict(d.x.row(r))[0]) < 1e-8);
}

TEST_CASE("plsr examples") {
    Rng rng(8);
    {
        Matrix x = oracles::random_matrix(rng, 15, 1);
        std::vector<double> y(15);
        for (std::size_t r = 0; r < 15; ++r) y[r] = 2.0 * x(r, 0) + rng.normal();
        const auto pls = fit_plsr(x, y, 1);
        const auto ols = fit_mlr(x, y);
        for (std::size_t r = 0; r < 15; ++r) CHECK(std::abs(pls.predict(x.row(r))[0] - ols.predict(x.row(r))[0]) < 1e-8);
    }
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t p = 2 + rng.below(9);
        auto d = planted(rng, p + 10, p);
        for (auto& v : d.y) v += rng.normal();
        const auto pls = fit_plsr(d.x, d.y, p);
        const auto ols = fit_mlr(d.x, d.y);
        const auto q = oracles::random_matrix(rng, 5, p, -3.0, 3.0);
        for (std::size_t r = 0; r < 5; ++r) CHECK(std::abs(pls.predict(q.row(r))[0] - ols.predict(q.row(r))[0]) < 1e-6);
    }
    {
        const auto x = oracles::random_matrix(rng, 10, 3);
        const auto pls = fit_plsr(x, std::vector<double>(10, 4.25), 2);
        CHECK(pls.predict(std::vector<double>{9, -9, 3})[0] == doctest::Approx(4.25).epsilon(1e-14));
        CHECK_THROWS_AS(fit_plsr(x, std::vector<double>(10, 1.0), 4), ArgumentError);
        CHECK_THROWS_AS(fit_plsr(x, std::vector<double>(10, 1.0), 0), ArgumentError);
    }
}

TEST_CASE("knn examples") {
    const auto x = Matrix::from_rows({{0, 0}, {2, 0}, {0, 5}, {9, 9}});
    const std::vector<double> y{10, 20, 30, 40};
    const auto k1 = fit_knn(x, y, 1);
    for (std::size_t r = 0; r < 4; ++r) CHECK(k1.predict(x.row(r))[0] == y[r]);
    const auto k2 = fit_knn(x, y, 2);
    CHECK(k2.predict(std::vector<double>{1, 0})[0] == 15.0);
    const auto kall = fit_knn(x, y, 4);
    CHECK(kall.predict(std::vector<double>{-100, 3})[0] == 25.0);
    // equidistant from rows 0 and 1; k=1 takes the lower index
    CHECK(k1.predict(std::vector<double>{1, 0})[0] == 10.0);
    CHECK_THROWS_AS(fit_knn(x, y, 5), ArgumentError);
    CHECK_THROWS_AS(fit_knn(x, y, 0), ArgumentError);
}

TEST_CASE("rf examples") {
    Rng rng(21);
    {
        const auto x = oracles::random_matrix(rng, 12, 3);
        const auto m = fit_rf(x, std::vector<double>(12, 7.5), 3, 10, 1);
        CHECK(m.predict(std::vector<double>{0.3, 5, -2})[0] == 7.5);
    }
    {
        const auto x = Matrix(6, 2, 1.0);
        const auto m = fit_rf(x, std::vector<double>{1, 2, 3, 4, 5, 6}, 3, 5, 1);
        for (const auto& t : std::get<Forest>(m.model()).trees) CHECK(t.nodes.size() == 1);
    }
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.below(40), p = 1 + rng.below(5), depth = 1 + rng.below(5);
        const auto x = oracles::random_matrix(rng, n, p);
        std::vector<double> y(n);
        for (auto& v : y) v = rng.uniform(-10, 10);
        const auto m = fit_rf(x, y, depth, 20, static_cast<std::uint64_t>(trial));
        for (const auto& t : std::get<Forest>(m.model()).trees) CHECK(t.depth() <= depth);
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        for (int q = 0; q < 20; ++q) {
            const auto query = oracles::random_matrix(rng, 1, p, -3, 3);
            const double v = m.predict(query.row(0))[0];
            CHECK(v >= *lo);
            CHECK(v <= *hi);
        }
        const auto again = fit_rf(x, y, depth, 20, static_cast<std::uint64_t>(trial));
        CHECK(to_json(again) == to_json(m));
    }
    const auto x = oracles::random_matrix(rng, 5, 2);
    CHECK_THROWS_AS(fit_rf(x, std::vector<double>(5, 1.0), 0, 5, 1), ArgumentError);
    CHECK_THROWS_AS(fit_rf(Matrix(1, 2), std::vector<double>{1}, 2, 5, 1), ArgumentError);
}

TEST_CASE("rf: one split recovers a step function") {
    Matrix x(20, 1);
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = static_cast<double>(i);
        y[i] = i < 10 ? 1.0 : 5.0;
    }
    const auto m = fit_rf(x, y, 1, 1, 3);
    const auto& tree = std::get<Forest>(m.model()).trees[0];
    CHECK(tree.depth() == 1);
    CHECK(tree.nodes[0].feature == 0);
}

TEST_CASE("ann1 specs and zero-epoch training") {
    CHECK(ann1_spec(17, 80, 1, 0).layer_widths == std::vector<std::size_t>{17, 80, 1});
    CHECK(ann1_spec(17, 60, 1, 0).layer_widths == std::vector<std::size_t>{17, 60, 1});
    const auto ofdf = RegressorSpec::defaults(RegressorKind::ann1, TaskKind::ofdf_like);
    CHECK(ofdf.ann_hidden == 80);
    CHECK(ofdf.ann_train.epochs == 900);
    const auto srmt = RegressorSpec::defaults(RegressorKind::ann1, TaskKind::srmt_like);
    CHECK(srmt.ann_hidden == 60);
    CHECK(srmt.ann_train.epochs == 2600);

    Rng rng(2);
    const auto x = oracles::random_matrix(rng, 8, 3);
    const auto y = oracles::random_matrix(rng, 8, 1);
    const auto m = fit_ann1(x, y, 5, {0.01, 0.8, 0}, 77);
    CHECK(std::get<Ann1>(m.model()).params == deepnet::init(ann1_spec(3, 5, 1, 77)));
}

TEST_CASE("regressor defaults per task") {
    CHECK(RegressorSpec::defaults(RegressorKind::plsr, TaskKind::ofdf_like).pls_components == 8);
    CHECK(RegressorSpec::defaults(RegressorKind::plsr, TaskKind::srmt_like).pls_components == 10);
    CHECK(RegressorSpec::defaults(RegressorKind::knn, TaskKind::ofdf_like).knn_neighbors == 5);
    CHECK(RegressorSpec::defaults(RegressorKind::knn, TaskKind::srmt_like).knn_neighbors == 3);
    CHECK(RegressorSpec::defaults(RegressorKind::rf, TaskKind::ofdf_like).rf_max_depth == 3);
    CHECK(RegressorSpec::defaults(RegressorKind::rf, TaskKind::srmt_like).rf_max_depth == 5);
    CHECK(parse_regressor_kind("ann") == RegressorKind::ann1);
    CHECK_THROWS_AS(parse_regressor_kind("svm"), ArgumentError);
    auto bad = RegressorSpec::defaults(RegressorKind::rf, TaskKind::ofdf_like);
    bad.rf_trees = 0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("fit_multi") {
    Rng rng(6);
    const auto x = oracles::random_matrix(rng, 30, 4);
    const auto y = oracles::random_matrix(rng, 30, 4);
    for (auto kind : {RegressorKind::mlr, RegressorKind::plsr, RegressorKind::knn, RegressorKind::rf}) {
        auto spec = RegressorSpec::defaults(kind, TaskKind::srmt_like);
        spec.pls_components = 3;
        spec.rf_trees = 10;
        const auto wrapper = fit_multi(spec, x, y);
        CHECK(wrapper.models.size() == 4);
        const auto pred = wrapper.predict(x);

        // Permute the other target columns: target 0 predictions are unchanged.
        Matrix perm = y;
        for (std::size_t r = 0; r < 30; ++r) {
            perm(r, 1) = y(29 - r, 2);
            perm(r, 2) = y(r, 3);
            perm(r, 3) = y(29 - r, 1);
        }
        const auto pred2 = fit_multi(spec, x, perm).predict(x);
        for (std::size_t r = 0; r < 30; ++r) CHECK(pred2(r, 0) == pred(r, 0));

        Matrix one(30, 1);
        for (std::size_t r = 0; r < 30; ++r) one(r, 0) = y(r, 0);
        const auto single = fit_multi(spec, x, one);
        CHECK(single.models.size() == 1);
        auto bare_spec = spec;
        bare_spec.seed = derive_seed(spec.seed, 0);
        const auto bare = fit(bare_spec, x, one.column(0));
        for (std::size_t r = 0; r < 30; ++r) CHECK(single.predict(x)(r, 0) == bare.predict(x.row(r))[0]);
    }
    CHECK_THROWS_AS(fit_multi(RegressorSpec{}, x, Matrix(30, 0)), ArgumentError);
}

TEST_CASE("serialization round trip is bit-identical") {
    Rng rng(99);
    const auto x = oracles::random_matrix(rng, 25, 3);
    const auto y = oracles::random_matrix(rng, 25, 2);
    for (auto kind : {RegressorKind::mlr, RegressorKind::plsr, RegressorKind::knn, RegressorKind::rf,
                      RegressorKind::ann1}) {
        auto spec = RegressorSpec::defaults(kind, TaskKind::ofdf_like);
        spec.pls_components = 2;
        spec.rf_trees = 8;
        spec.ann_hidden = 6;
        spec.ann_train.epochs = 20;
        const auto wrapper = fit_multi(spec, x, y);
        const auto text = to_json(wrapper).dump();
        const auto loaded = multi_from_json(nlohmann::json::parse(text));
        CHECK(to_json(loaded.spec) == to_json(wrapper.spec));
        const auto q = oracles::random_matrix(rng, 10, 3, -1, 2);
        CHECK(loaded.predict(q) == wrapper.predict(q));
        CHECK(to_json(loaded).dump() == text);
    }
}

TEST_CASE("predict rejects wrong input width") {
    const auto m = fit_mlr(Matrix::from_rows({{1, 2}, {2, 1}, {3, 3}}), std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(m.predict(std::vector<double>{1}), ArgumentError);
    const auto rf = fit_rf(Matrix::from_rows({{1, 2}, {2, 1}, {3, 3}}), std::vector<double>{1, 2, 3}, 2, 3, 0);
    CHECK_THROWS_AS(rf.predict(std::vector<double>{1, 2, 3}), ArgumentError);
}
