#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/baselines.hpp"
#include "formulab/data_model.hpp"
#include "formulab/deepnet.hpp"
#include "formulab/splitting.hpp"

namespace formulab {

inline constexpr int kModelFormatVersion = 1;

struct DnnModel {
    deepnet::PresetName preset = deepnet::PresetName::ofdf_dnn;
    deepnet::NetworkSpec spec;
    deepnet::TrainConfig config;
    deepnet::NetworkParams params;
};

/// A trained model plus everything needed to predict from raw records: the
/// schema, the category code tables and the scaling fitted on training rows.
struct ModelArtifact {
    std::string name;
    DatasetSchema schema;
    CategoryEncoder encoder;
    ScalingParams scaling;
    std::variant<baselines::MultiTargetWrapper, DnnModel> model;

    // Scaled features in, scaled targets out.
    Matrix predict_scaled(const Matrix& scaled_features) const;
    // Raw (unscaled, encoded with `encoder`) dataset in, original target units out.
    Matrix predict(const Dataset& ds) const;
};

nlohmann::json to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const nlohmann::json& j);
ModelArtifact load_artifact(const std::filesystem::path& path);
void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path);

/// What to train. `name` is one of mlr, plsr, knn, rf, ann1, dnn-ofdf, dnn-srmt.
struct ModelRequest {
    std::string name;
    std::optional<baselines::RegressorSpec> regressor;  // baselines; task defaults when empty
    deepnet::PresetOverrides dnn_overrides;             // DNN presets
    std::uint64_t seed = 0;

    bool is_dnn() const { return name.starts_with("dnn"); }
};

// Task-default request for a model name; throws ArgumentError for unknown names.
ModelRequest default_request(const std::string& name, TaskKind task, std::uint64_t seed);

struct TrainedModel {
    ModelArtifact artifact;
    std::vector<double> loss_trace;  // empty for models without a training loop
};

/// Fits scaling on the training rows only, then trains the requested model on
/// the scaled training subset.
TrainedModel train_model(const ModelRequest& request, const Dataset& ds, const splitting::SplitAssignment& split);

}  // namespace formulab
