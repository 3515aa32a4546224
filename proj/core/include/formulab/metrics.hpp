#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/data_model.hpp"
#include "formulab/splitting.hpp"

namespace formulab::metrics {

// Cumulative percent released at strictly increasing time points (hours).
struct DissolutionProfile {
    std::vector<double> times;
    std::vector<double> released;

    // Profile on the default 2/4/6/8 h grid.
    static DissolutionProfile standard(std::vector<double> released);
    void validate() const;
};

inline constexpr double kF2Threshold = 50.0;
inline constexpr double kDisintegrationToleranceSeconds = 10.0;

/// FDA similarity factor:
///   f2 = 50 * log10(100 / sqrt(1 + mean_t (R_t - T_t)^2))
/// evaluated as 100 - 25 * log10(1 + mse) so identical profiles give exactly 100.
double f2_similarity(const DissolutionProfile& reference, const DissolutionProfile& test);

// Fraction of f2 values >= 50 (boundary counts as success).
double accuracy_from_f2(std::span<const double> f2_values);

double accuracy_cdrc(std::span<const std::pair<DissolutionProfile, DissolutionProfile>> pairs);

// Fraction of (experimental, predicted) seconds with |error| <= 10 s.
double accuracy_dt(std::span<const std::pair<double, double>> pairs);

double rmse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);

struct RecordDetail {
    std::string record_id;
    std::vector<double> experimental;
    std::vector<double> predicted;
    // f2 for SRMT-like tasks, absolute error in seconds for OFDF-like tasks.
    double score = 0.0;
    bool pass = false;
};

struct SplitMetrics {
    double accuracy = 0.0;
    double rmse = 0.0;  // normalized target scale
    double mae = 0.0;   // normalized target scale
    std::vector<RecordDetail> records;
};

struct EvaluationReport {
    std::string model;
    TaskKind task_kind = TaskKind::ofdf_like;
    std::vector<std::string> target_names;
    SplitMetrics train;
    SplitMetrics validation;
    SplitMetrics test;
};

/// `predictions` has one row per dataset record, in original target units.
/// `ds` must carry unscaled targets; `scaling` supplies the normalized axis for
/// RMSE/MAE. Accuracy uses accuracy_dt for OFDF-like tasks and accuracy_cdrc
/// on 4-point profiles for SRMT-like tasks. Predicted percentages are clamped
/// into [0, 100] before computing f2.
EvaluationReport evaluate(const std::string& model_name, const Matrix& predictions, const Dataset& ds,
                          const splitting::SplitAssignment& split, const ScalingParams& scaling);

SplitMetrics evaluate_subset(const Matrix& predictions, const Dataset& ds, std::span<const std::size_t> indices,
                             const ScalingParams& scaling);

nlohmann::json to_json(const EvaluationReport& report);

// record_id,target,experimental,predicted
void write_scatter_csv(std::ostream& out, const SplitMetrics& metrics, const std::vector<std::string>& target_names);

}  // namespace formulab::metrics
