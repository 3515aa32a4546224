#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/matrix.hpp"

namespace formulab::deepnet {

/// Fully connected regression network: tanh on every hidden layer, sigmoid on
/// the output layer. `layer_widths` runs from input width to output width, so a
/// spec with L+1 widths has L weight layers.
struct NetworkSpec {
    std::vector<std::size_t> layer_widths;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t input_width() const { return layer_widths.front(); }
    std::size_t output_width() const { return layer_widths.back(); }
    std::size_t weight_layers() const { return layer_widths.size() - 1; }
};

struct Layer {
    Matrix weights;               // fan_out x fan_in
    std::vector<double> biases;   // fan_out

    friend bool operator==(const Layer&, const Layer&) = default;
};

struct NetworkParams {
    std::vector<Layer> layers;

    std::size_t input_width() const { return layers.front().weights.cols(); }
    std::size_t output_width() const { return layers.back().weights.rows(); }
    std::size_t parameter_count() const;

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Same shape as NetworkParams; holds d(loss)/d(param).
using Gradient = NetworkParams;

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.8;
    std::size_t epochs = 900;

    void validate() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainResult {
    NetworkParams params;
    // loss_trace[e] is the loss before update e; the last entry is the final
    // loss, so the trace has epochs + 1 entries.
    std::vector<double> loss_trace;
};

enum class PresetName { ofdf_dnn, srmt_dnn };

PresetName parse_preset(std::string_view name);
std::string preset_label(PresetName name);

struct PresetOverrides {
    std::optional<std::size_t> hidden_layers;
    std::optional<std::size_t> hidden_width;
    std::optional<std::size_t> epochs;
};

struct Preset {
    NetworkSpec spec;
    TrainConfig config;
};

/// OFDF-DNN: 9 tanh hidden layers of 50 + sigmoid output (10 weight layers),
/// 900 epochs. SRMT-DNN: 8 tanh hidden layers of 30 + sigmoid output
/// (9 weight layers), 2600 epochs, 4 outputs unless `output_width` is given.
/// Both use learning rate 0.01 and momentum 0.8.
Preset preset(PresetName name, std::size_t input_width,
              std::optional<std::size_t> output_width = std::nullopt,
              const PresetOverrides& overrides = {}, std::uint64_t seed = 0);

// Glorot-uniform weights, zero biases.
NetworkParams init(const NetworkSpec& spec);

std::vector<double> forward(const NetworkParams& params, std::span<const double> x);
Matrix forward_batch(const NetworkParams& params, const Matrix& x);

// Mean squared error over all rows and outputs.
double loss(const NetworkParams& params, const Matrix& x, const Matrix& y);

// Exact gradient of loss(); optionally reports the loss at params.
Gradient gradient(const NetworkParams& params, const Matrix& x, const Matrix& y,
                  double* loss_out = nullptr);

/// Full-batch gradient descent with classical momentum:
///   v <- momentum * v - learning_rate * g;  theta <- theta + v
/// Targets must already lie in [0, 1].
TrainResult train(const NetworkSpec& spec, const TrainConfig& config, const Matrix& x,
                  const Matrix& y);

nlohmann::json to_json(const NetworkParams& params);
NetworkParams params_from_json(const nlohmann::json& j);

}  // namespace formulab::deepnet
