#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "formulab/baselines.hpp"
#include "formulab/errors.hpp"
#include "formulab/splitting.hpp"
#include "formulab/synthgen.hpp"

using namespace formulab;
using namespace formulab::synthgen;

namespace {

double u(double v, double lo, double hi) { return (v - lo) / (hi - lo); }

// Closed forms re-typed from the header documentation.
double ofdf_curve(const FormulationRecord& r) {
    const auto& n = r.numerics;
    const std::string& polymer = r.categoricals.at("polymer_type");
    const double effect = polymer == "HPMC" ? 8 : polymer == "PVA" ? 12 : polymer == "PVP" ? -4 : 0;
    const double logs = 1.0 - u(n.at("log_s"), -6, 0);
    const double dt = 8 + 42 * u(n.at("thickness"), 40, 200) * (0.6 + 0.4 * u(n.at("polymer_content"), 30, 80)) +
                      12 * u(n.at("weight"), 20, 120) - 10 * u(n.at("plasticizer_content"), 0, 25) + 15 * logs * logs +
                      6 * u(n.at("molecular_weight"), 150, 600) + effect;
    return std::clamp(dt, 0.0, 100.0);
}

std::vector<double> srmt_curve(const FormulationRecord& r) {
    const auto& n = r.numerics;
    const auto& grade = r.categoricals.at("hpmc_grade");
    const auto& filler = r.categoricals.at("filler_type");
    const auto& process = r.categoricals.at("granulation_process");
    const double g = grade == "K4M" ? 0.3 : grade == "K15M" ? 0.5 : grade == "K100M" ? 0.7 : 0.0;
    const double f = filler == "lactose" ? 0.2 : filler == "dicalcium_phosphate" ? -0.15 : 0.0;
    const double p = process == "wet_granulation" ? -0.1 : process == "dry_granulation" ? 0.05 : 0.0;
    const double e = -1.6 * u(n.at("hpmc_content"), 10, 50) - g + 0.8 * u(n.at("log_s"), -6, 0) -
                     0.5 * u(n.at("hardness"), 40, 150) - 0.3 * u(n.at("diameter"), 6, 13) +
                     0.4 * u(n.at("drug_content"), 5, 50) + f + p;
    const double k = 0.2 * std::exp(0.5 * e);
    std::vector<double> out;
    for (double t : {2.0, 4.0, 6.0, 8.0}) out.push_back(100.0 * (1.0 - std::exp(-k * t)));
    return out;
}

}  // namespace

TEST_CASE("corpus shapes and histograms") {
    const auto ofdf = generate(TaskKind::ofdf_like, ofdf_corpus_config(1));
    CHECK(ofdf.size() == 131);
    CHECK(ofdf.group_index().size() == 13);
    const auto srmt = generate(TaskKind::srmt_like, srmt_corpus_config(1));
    CHECK(srmt.size() == 145);
    CHECK(srmt.group_index().size() == 29);

    for (const auto* ds : {&ofdf, &srmt}) {
        const auto cfg = ds->size() == 131 ? ofdf_corpus_config(1) : srmt_corpus_config(1);
        std::multiset<std::size_t> want(cfg.group_sizes.begin(), cfg.group_sizes.end()), got;
        for (const auto& [g, idx] : ds->group_index()) got.insert(idx.size());
        CHECK(got == want);
        const auto small = std::count_if(cfg.group_sizes.begin(), cfg.group_sizes.end(), [](auto s) { return s < 4; });
        CHECK(small == static_cast<long>(cfg.group_sizes.size() / 2));
    }
}

TEST_CASE("explicit group sizes are honoured exactly") {
    const SynthConfig cfg{12, {5, 1, 6}, 3.0, 9, false};
    const auto ds = generate_ofdf_like(cfg);
    CHECK(ds.group_index().at("API-01").size() == 5);
    CHECK(ds.group_index().at("API-02").size() == 1);
    CHECK(ds.group_index().at("API-03").size() == 6);
    CHECK_THROWS_AS(generate_ofdf_like({12, {5, 1}, 3.0, 9, false}), ArgumentError);
    CHECK_THROWS_AS(generate_ofdf_like({6, {5, 1}, -1.0, 9, false}), ArgumentError);
    CHECK_THROWS_AS(generate_ofdf_like({6, {6, 0}, 1.0, 9, false}), ArgumentError);
    CHECK_THROWS_AS(default_group_sizes(10, 5), ArgumentError);
}

TEST_CASE("ofdf: ranges, determinism, noise-free curve") {
    const auto a = generate_ofdf_like(ofdf_corpus_config(3));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.targets()(i, 0) >= 0.0);
        CHECK(a.targets()(i, 0) <= 100.0);
    }
    const auto quiet = generate_ofdf_like(ofdf_corpus_config(3, 0.0));
    CHECK(quiet.records() == generate_ofdf_like(ofdf_corpus_config(3, 0.0)).records());
    for (std::size_t i = 0; i < quiet.size(); ++i) {
        CHECK(quiet.targets()(i, 0) == doctest::Approx(ofdf_curve(quiet.record(i))).epsilon(1e-12));
        // noise only touches the target
        CHECK(quiet.record(i).numerics == a.record(i).numerics);
    }
    CHECK_FALSE(generate_ofdf_like(ofdf_corpus_config(4)).records() == a.records());
}

TEST_CASE("srmt: monotone profiles, ranges, noise-free curve") {
    const auto noisy = generate_srmt_like(srmt_corpus_config(5, 6.0));
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        const auto row = noisy.targets().row(i);
        CHECK(std::is_sorted(row.begin(), row.end()));
        for (double v : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 100.0);
        }
    }
    const auto quiet = generate_srmt_like(srmt_corpus_config(5, 0.0));
    for (std::size_t i = 0; i < quiet.size(); ++i) {
        const auto want = srmt_curve(quiet.record(i));
        for (std::size_t t = 0; t < 4; ++t) CHECK(quiet.targets()(i, t) == doctest::Approx(want[t]).epsilon(1e-12));
    }
}

TEST_CASE("generated data passes schema validation and round-trips through csv") {
    for (auto task : {TaskKind::ofdf_like, TaskKind::srmt_like}) {
        const auto ds = generate(task, task == TaskKind::ofdf_like ? ofdf_corpus_config(2) : srmt_corpus_config(2));
        CHECK_NOTHROW(Dataset::build(ds.schema(), ds.records()));
        for (const auto& r : ds.records()) {
            DescriptorSet d;
            for (std::size_t k = 0; k < 9; ++k) d.values[k] = r.numerics.at(std::string(DescriptorSet::names[k]));
            CHECK_NOTHROW(d.validate());
        }
    }
}

TEST_CASE("linearized variants are exactly learnable by MLR") {
    for (auto task : {TaskKind::ofdf_like, TaskKind::srmt_like}) {
        auto cfg = task == TaskKind::ofdf_like ? ofdf_corpus_config(7, 0.0) : srmt_corpus_config(7, 0.0);
        cfg.linearized = true;
        const auto ds = generate(task, cfg);
        std::vector<std::size_t> train, held;
        for (std::size_t i = 0; i < ds.size(); ++i) (i % 4 == 0 ? held : train).push_back(i);
        const auto xt = ds.features().select_rows(train);
        const auto xh = ds.features().select_rows(held);
        for (std::size_t t = 0; t < ds.targets().cols(); ++t) {
            std::vector<double> y;
            for (auto i : train) y.push_back(ds.targets()(i, t));
            const auto m = baselines::fit_mlr(xt, y);
            double se = 0.0;
            for (std::size_t r = 0; r < held.size(); ++r) se += std::pow(m.predict(xh.row(r))[0] - ds.targets()(held[r], t), 2);
            CHECK(std::sqrt(se / static_cast<double>(held.size())) < 1e-8);
        }
    }
}

TEST_CASE("brute_force_max_dissim preconditions and k = 1") {
    Matrix pts(5, 1);
    for (std::size_t i = 0; i < 5; ++i) pts(i, 0) = static_cast<double>(i * i);
    const auto dt = splitting::DistanceTable::from_points(pts);
    const std::vector<std::size_t> initial{0}, pool{1, 2, 3, 4};
    CHECK(brute_force_max_dissim(dt, initial, pool, 1) == std::vector<std::size_t>{4});
    CHECK_THROWS_AS(brute_force_max_dissim(dt, std::vector<std::size_t>{}, pool, 1), ArgumentError);
    std::vector<std::size_t> big(13);
    CHECK_THROWS_AS(brute_force_max_dissim(dt, initial, big, 1), ArgumentError);
}

TEST_CASE("config json carries the generator version") {
    const auto j = to_json(ofdf_corpus_config(3));
    CHECK(j.at("generator") == kGeneratorVersion);
    CHECK(j.at("n_records") == 131);
}
