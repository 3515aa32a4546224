#include "formulab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "formulab/errors.hpp"

namespace formulab::metrics {
namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat, const char* what) {
    if (y.empty()) throw ArgumentError(std::string(what) + ": empty input");
    if (y.size() != yhat.size())
        throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                            std::to_string(yhat.size()) + ")");
}

}  // namespace

DissolutionProfile DissolutionProfile::standard(std::vector<double> released) {
    if (released.size() != 4) throw ArgumentError("standard dissolution profile needs 4 values (2/4/6/8 h)");
    return {{2.0, 4.0, 6.0, 8.0}, std::move(released)};
}

void DissolutionProfile::validate() const {
    if (times.empty()) throw ArgumentError("dissolution profile has no time points");
    if (times.size() != released.size()) throw ArgumentError("dissolution profile: times/values length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw ArgumentError("dissolution profile: times must be strictly increasing");
    for (double v : released)
        if (!(v >= 0.0 && v <= 100.0)) throw ArgumentError("dissolution profile: value outside [0, 100] %");
}

double f2_similarity(const DissolutionProfile& reference, const DissolutionProfile& test) {
    reference.validate();
    test.validate();
    if (reference.times != test.times) throw ArgumentError("f2: profiles use different time grids");
    double sum = 0.0;
    for (std::size_t t = 0; t < reference.released.size(); ++t) {
        const double d = reference.released[t] - test.released[t];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(reference.released.size());
    return 100.0 - 25.0 * std::log10(1.0 + mse);
}

double accuracy_from_f2(std::span<const double> f2_values) {
    if (f2_values.empty()) throw ArgumentError("accuracy_cdrc: empty prediction list");
    const auto hits = std::count_if(f2_values.begin(), f2_values.end(), [](double f) { return f >= kF2Threshold; });
    return static_cast<double>(hits) / static_cast<double>(f2_values.size());
}

double accuracy_cdrc(std::span<const std::pair<DissolutionProfile, DissolutionProfile>> pairs) {
    if (pairs.empty()) throw ArgumentError("accuracy_cdrc: empty prediction list");
    std::vector<double> f2;
    f2.reserve(pairs.size());
    for (const auto& [experimental, predicted] : pairs) f2.push_back(f2_similarity(experimental, predicted));
    return accuracy_from_f2(f2);
}

double accuracy_dt(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw ArgumentError("accuracy_dt: empty prediction list");
    const auto hits = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) {
        return std::abs(p.second - p.first) <= kDisintegrationToleranceSeconds;
    });
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y, yhat, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

SplitMetrics evaluate_subset(const Matrix& predictions, const Dataset& ds, std::span<const std::size_t> indices,
                             const ScalingParams& scaling) {
    SplitMetrics m;
    if (indices.empty()) return m;
    const std::size_t width = ds.schema().targets.size();
    const bool srmt = ds.schema().task_kind == TaskKind::srmt_like;

    std::vector<double> y_scaled, yhat_scaled;
    std::vector<std::pair<double, double>> times;
    std::vector<double> f2s;
    for (auto i : indices) {
        RecordDetail d;
        d.record_id = ds.record(i).record_id;
        auto exp_row = ds.targets().row(i);
        auto pred_row = predictions.row(i);
        d.experimental.assign(exp_row.begin(), exp_row.end());
        d.predicted.assign(pred_row.begin(), pred_row.end());
        for (std::size_t t = 0; t < width; ++t) {
            y_scaled.push_back(scaling.targets[t].scale(exp_row[t]));
            yhat_scaled.push_back(scaling.targets[t].scale(pred_row[t]));
        }
        if (srmt) {
            std::vector<double> clamped(d.predicted);
            for (auto& v : clamped) v = std::clamp(v, 0.0, 100.0);
            if (width != 4) throw ArgumentError("evaluate: SRMT-like task needs 4 targets (2/4/6/8 h)");
            d.score = f2_similarity(DissolutionProfile::standard(d.experimental),
                                    DissolutionProfile::standard(std::move(clamped)));
            d.pass = d.score >= kF2Threshold;
            f2s.push_back(d.score);
        } else {
            d.score = std::abs(d.predicted[0] - d.experimental[0]);
            d.pass = d.score <= kDisintegrationToleranceSeconds;
            times.emplace_back(d.experimental[0], d.predicted[0]);
        }
        m.records.push_back(std::move(d));
    }
    m.accuracy = srmt ? accuracy_from_f2(f2s) : accuracy_dt(times);
    m.rmse = rmse(y_scaled, yhat_scaled);
    m.mae = mae(y_scaled, yhat_scaled);
    return m;
}

EvaluationReport evaluate(const std::string& model_name, const Matrix& predictions, const Dataset& ds,
                          const splitting::SplitAssignment& split, const ScalingParams& scaling) {
    if (ds.scaling()) throw ArgumentError("evaluate: dataset must carry targets in original units");
    if (!ds.has_targets()) throw ArgumentError("evaluate: dataset has no targets");
    if (predictions.rows() != ds.size() || predictions.cols() != ds.schema().targets.size())
        throw ArgumentError("evaluate: predictions must cover every record and target");
    if (scaling.targets.size() != ds.schema().targets.size())
        throw ArgumentError("evaluate: scaling params do not match targets");
    split.check_partition(ds.size());
    for (const auto* part : {&split.train, &split.validation, &split.test})
        for (auto i : *part)
            for (double v : predictions.row(i))
                if (!std::isfinite(v))
                    throw ArgumentError("evaluate: missing prediction for record '" + ds.record(i).record_id + "'");

    EvaluationReport r;
    r.model = model_name;
    r.task_kind = ds.schema().task_kind;
    r.target_names = ds.schema().targets;
    r.train = evaluate_subset(predictions, ds, split.train, scaling);
    r.validation = evaluate_subset(predictions, ds, split.validation, scaling);
    r.test = evaluate_subset(predictions, ds, split.test, scaling);
    return r;
}

nlohmann::json to_json(const EvaluationReport& report) {
    const bool srmt = report.task_kind == TaskKind::srmt_like;
    auto detail = [&](const SplitMetrics& m) {
        nlohmann::json records = nlohmann::json::array();
        for (const auto& d : m.records) {
            nlohmann::json rec = {{"record_id", d.record_id},
                                  {"experimental", d.experimental},
                                  {"predicted", d.predicted},
                                  {"pass", d.pass}};
            rec[srmt ? "f2" : "abs_error"] = d.score;
            records.push_back(std::move(rec));
        }
        return records;
    };
    auto summary = [](const SplitMetrics& m) {
        return nlohmann::json{{"accuracy", m.accuracy}, {"rmse", m.rmse}, {"mae", m.mae}};
    };
    return {{"model", report.model},
            {"task_kind", to_string(report.task_kind)},
            {"targets", report.target_names},
            {"train", summary(report.train)},
            {"validation", summary(report.validation)},
            {"test", summary(report.test)},
            {"records",
             {{"train", detail(report.train)}, {"validation", detail(report.validation)}, {"test", detail(report.test)}}}};
}

void write_scatter_csv(std::ostream& out, const SplitMetrics& metrics, const std::vector<std::string>& target_names) {
    out << "record_id,target,experimental,predicted\n";
    for (const auto& d : metrics.records)
        for (std::size_t t = 0; t < target_names.size(); ++t)
            out << d.record_id << ',' << target_names[t] << ',' << format_double(d.experimental[t]) << ','
                << format_double(d.predicted[t]) << '\n';
}

}  // namespace formulab::metrics
