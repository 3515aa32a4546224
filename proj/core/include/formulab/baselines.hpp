#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/data_model.hpp"
#include "formulab/deepnet.hpp"
#include "formulab/matrix.hpp"

namespace formulab::baselines {

enum class RegressorKind { mlr, plsr, knn, rf, ann1 };

std::string to_string(RegressorKind kind);
RegressorKind parse_regressor_kind(std::string_view text);

struct RegressorSpec {
    RegressorKind kind = RegressorKind::mlr;
    std::size_t pls_components = 8;
    std::size_t knn_neighbors = 5;
    std::size_t rf_max_depth = 3;
    std::size_t rf_trees = 100;
    double rf_feature_fraction = 1.0;  // share of features tried at each split
    std::size_t ann_hidden = 80;
    deepnet::TrainConfig ann_train{};
    std::uint64_t seed = 0;

    void validate() const;

    // Per-task defaults: OFDF PLSR 8 / ANN 80 / RF depth 3 / k-NN 5;
    // SRMT PLSR 10 / ANN 60 / RF depth 5 / k-NN 3. ANN training follows the
    // matching DNN preset (900 or 2600 epochs).
    static RegressorSpec defaults(RegressorKind kind, TaskKind task);

    friend bool operator==(const RegressorSpec&, const RegressorSpec&) = default;
};

nlohmann::json to_json(const RegressorSpec& spec);
RegressorSpec regressor_spec_from_json(const nlohmann::json& j);

// y = coefficients . x + intercept (MLR and PLSR both reduce to this).
struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;
};

struct KnnModel {
    Matrix rows;
    std::vector<double> targets;
    std::size_t k = 1;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    // Longest root-to-leaf path, counted in splits.
    std::size_t depth() const;
};

struct Forest {
    std::vector<RegressionTree> trees;
    std::size_t n_features = 0;
};

struct Ann1 {
    deepnet::NetworkParams params;
};

class TrainedRegressor {
public:
    using Model = std::variant<LinearModel, KnnModel, Forest, Ann1>;

    TrainedRegressor(RegressorKind kind, Model model) : kind_(kind), model_(std::move(model)) {}

    RegressorKind kind() const { return kind_; }
    const Model& model() const { return model_; }
    std::size_t input_width() const;
    std::size_t output_width() const;

    std::vector<double> predict(std::span<const double> x) const;
    Matrix predict(const Matrix& x) const;

private:
    RegressorKind kind_;
    Model model_;
};

nlohmann::json to_json(const TrainedRegressor& model);
TrainedRegressor regressor_from_json(const nlohmann::json& j);

/// Least squares with intercept; rank-deficient designs get the minimum-norm
/// solution on centered data.
TrainedRegressor fit_mlr(const Matrix& x, std::span<const double> y);

/// PLS1 by NIPALS on centered data, composed into a single linear predictor.
TrainedRegressor fit_plsr(const Matrix& x, std::span<const double> y, std::size_t n_components);

TrainedRegressor fit_knn(const Matrix& x, std::span<const double> y, std::size_t k);

/// Bagged variance-reduction regression trees. Each tree fits a bootstrap
/// resample drawn with its own derived seed.
TrainedRegressor fit_rf(const Matrix& x, std::span<const double> y, std::size_t max_depth, std::size_t n_trees,
                        std::uint64_t seed, double feature_fraction = 1.0);

// Network [input, hidden_width, outputs] trained by deepnet::train.
TrainedRegressor fit_ann1(const Matrix& x, const Matrix& y, std::size_t hidden_width,
                          const deepnet::TrainConfig& config, std::uint64_t seed);
deepnet::NetworkSpec ann1_spec(std::size_t input_width, std::size_t hidden_width, std::size_t output_width,
                               std::uint64_t seed);

TrainedRegressor fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y);

// One independently fitted regressor per target column, same hyperparameters.
struct MultiTargetWrapper {
    RegressorSpec spec;
    std::vector<TrainedRegressor> models;

    Matrix predict(const Matrix& x) const;
};

MultiTargetWrapper fit_multi(const RegressorSpec& spec, const Matrix& x, const Matrix& y);

nlohmann::json to_json(const MultiTargetWrapper& wrapper);
MultiTargetWrapper multi_from_json(const nlohmann::json& j);

}  // namespace formulab::baselines
