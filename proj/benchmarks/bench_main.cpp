#include <benchmark/benchmark.h>

#include "formulab/baselines.hpp"
#include "formulab/deepnet.hpp"
#include "formulab/metrics.hpp"
#include "formulab/model_artifact.hpp"
#include "formulab/random.hpp"
#include "formulab/splitting.hpp"
#include "formulab/synthgen.hpp"

using namespace formulab;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform01();
    return m;
}

const Dataset& ofdf_corpus() {
    static const Dataset ds = synthgen::generate(TaskKind::ofdf_like, synthgen::ofdf_corpus_config(0));
    return ds;
}

void BM_F2(benchmark::State& state) {
    const auto a = metrics::DissolutionProfile::standard({20, 45, 65, 80});
    const auto b = metrics::DissolutionProfile::standard({25, 40, 70, 85});
    for (auto _ : state) benchmark::DoNotOptimize(metrics::f2_similarity(a, b));
}
BENCHMARK(BM_F2);

// Full-batch gradient of the OFDF preset on 91 rows.
void BM_GradientOfdfPreset(benchmark::State& state) {
    Rng rng(1);
    const auto preset = deepnet::preset(deepnet::PresetName::ofdf_dnn, 19);
    const auto params = deepnet::init(preset.spec);
    const auto x = random_matrix(rng, 91, 19);
    const auto y = random_matrix(rng, 91, 1);
    for (auto _ : state) benchmark::DoNotOptimize(deepnet::gradient(params, x, y));
}
BENCHMARK(BM_GradientOfdfPreset)->Unit(benchmark::kMicrosecond);

void BM_DistanceTable(benchmark::State& state) {
    const auto& ds = ofdf_corpus();
    for (auto _ : state) benchmark::DoNotOptimize(splitting::DistanceTable::from_dataset(ds));
}
BENCHMARK(BM_DistanceTable)->Unit(benchmark::kMicrosecond);

void BM_MdfisThreeWay(benchmark::State& state) {
    const auto& ds = ofdf_corpus();
    const auto dt = splitting::DistanceTable::from_dataset(ds);
    splitting::MdfisConfig cfg;
    cfg.n_initial_candidates = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(splitting::mdfis_three_way(ds, dt, cfg, 7));
}
BENCHMARK(BM_MdfisThreeWay)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitRf(benchmark::State& state) {
    Rng rng(2);
    const auto x = random_matrix(rng, 91, 19);
    std::vector<double> y(91);
    for (auto& v : y) v = rng.uniform01();
    for (auto _ : state) benchmark::DoNotOptimize(baselines::fit_rf(x, y, 3, 100, 5));
}
BENCHMARK(BM_FitRf)->Unit(benchmark::kMillisecond);

void BM_TrainOfdfPreset(benchmark::State& state) {
    const auto& ds = ofdf_corpus();
    const auto split = splitting::mdfis_three_way(ds, splitting::MdfisConfig{}, 0);
    auto request = default_request("dnn-ofdf", TaskKind::ofdf_like, 0);
    request.dnn_overrides.epochs = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(train_model(request, ds, split));
}
BENCHMARK(BM_TrainOfdfPreset)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
