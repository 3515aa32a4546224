#include "formulab/deepnet.hpp"

#include <cmath>
#include <string>

#include "formulab/errors.hpp"
#include "formulab/random.hpp"

namespace formulab::deepnet {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_batch(const NetworkParams& params, const Matrix& x, const Matrix& y) {
    if (x.rows() == 0) throw ArgumentError("deepnet: empty batch");
    if (x.cols() != params.input_width())
        throw ArgumentError("deepnet: input width " + std::to_string(x.cols()) + " != network input " +
                            std::to_string(params.input_width()));
    if (y.rows() != x.rows() || y.cols() != params.output_width())
        throw ArgumentError("deepnet: target shape does not match batch/network output");
}

// out = act(in * W^T + b), row-major, fixed summation order.
void dense_forward(const Layer& layer, const Matrix& in, Matrix& out, bool is_output) {
    const std::size_t n = in.rows();
    const std::size_t fan_in = layer.weights.cols();
    const std::size_t fan_out = layer.weights.rows();
    out = Matrix(n, fan_out);
    for (std::size_t r = 0; r < n; ++r) {
        const double* a = in.row(r).data();
        double* z = out.row(r).data();
        for (std::size_t o = 0; o < fan_out; ++o) {
            const double* w = layer.weights.row(o).data();
            double s = layer.biases[o];
            for (std::size_t i = 0; i < fan_in; ++i) s += w[i] * a[i];
            z[o] = is_output ? sigmoid(s) : std::tanh(s);
        }
    }
}

// Activations of every layer; acts[0] is the input.
std::vector<Matrix> forward_all(const NetworkParams& params, const Matrix& x) {
    std::vector<Matrix> acts(params.layers.size() + 1);
    acts[0] = x;
    for (std::size_t l = 0; l < params.layers.size(); ++l)
        dense_forward(params.layers[l], acts[l], acts[l + 1], l + 1 == params.layers.size());
    return acts;
}

double mse(const Matrix& pred, const Matrix& y) {
    double s = 0.0;
    const auto& p = pred.data();
    const auto& t = y.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        s += d * d;
    }
    return s / static_cast<double>(p.size());
}

Gradient zeros_like(const NetworkParams& params) {
    Gradient g;
    g.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers)
        g.layers.push_back({Matrix(layer.weights.rows(), layer.weights.cols()),
                            std::vector<double>(layer.biases.size(), 0.0)});
    return g;
}

}  // namespace

void NetworkSpec::validate() const {
    if (layer_widths.size() < 2) throw ArgumentError("NetworkSpec: need at least input and output widths");
    for (auto w : layer_widths)
        if (w < 1) throw ArgumentError("NetworkSpec: layer widths must be >= 1");
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.data().size() + l.biases.size();
    return n;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("TrainConfig: learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("TrainConfig: momentum must be in [0, 1)");
}

PresetName parse_preset(std::string_view name) {
    if (name == "OFDF-DNN" || name == "dnn-ofdf") return PresetName::ofdf_dnn;
    if (name == "SRMT-DNN" || name == "dnn-srmt") return PresetName::srmt_dnn;
    throw ArgumentError("unknown network preset '" + std::string(name) + "'");
}

std::string preset_label(PresetName name) {
    return name == PresetName::ofdf_dnn ? "OFDF-DNN" : "SRMT-DNN";
}

Preset preset(PresetName name, std::size_t input_width, std::optional<std::size_t> output_width,
              const PresetOverrides& overrides, std::uint64_t seed) {
    std::size_t hidden_layers = 0, width = 0, out = 0, epochs = 0;
    switch (name) {
        case PresetName::ofdf_dnn:
            hidden_layers = 9, width = 50, out = 1, epochs = 900;
            break;
        case PresetName::srmt_dnn:
            hidden_layers = 8, width = 30, out = 4, epochs = 2600;
            break;
    }
    if (output_width) out = *output_width;
    hidden_layers = overrides.hidden_layers.value_or(hidden_layers);
    width = overrides.hidden_width.value_or(width);
    epochs = overrides.epochs.value_or(epochs);
    if (input_width < 1 || out < 1) throw ArgumentError("preset: widths must be >= 1");

    Preset p;
    p.spec.seed = seed;
    p.spec.layer_widths.push_back(input_width);
    for (std::size_t i = 0; i < hidden_layers; ++i) p.spec.layer_widths.push_back(width);
    p.spec.layer_widths.push_back(out);
    p.config.learning_rate = 0.01;
    p.config.momentum = 0.8;
    p.config.epochs = epochs;
    p.spec.validate();
    return p;
}

NetworkParams init(const NetworkSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    NetworkParams params;
    for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
        const std::size_t fan_in = spec.layer_widths[l];
        const std::size_t fan_out = spec.layer_widths[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Layer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
        for (auto& w : layer.weights.data()) w = rng.uniform(-bound, bound);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

std::vector<double> forward(const NetworkParams& params, std::span<const double> x) {
    if (x.size() != params.input_width())
        throw ArgumentError("forward: input width " + std::to_string(x.size()) + " != " +
                            std::to_string(params.input_width()));
    Matrix in(1, x.size());
    std::copy(x.begin(), x.end(), in.row(0).begin());
    Matrix out = forward_batch(params, in);
    return out.data();
}

Matrix forward_batch(const NetworkParams& params, const Matrix& x) {
    if (x.cols() != params.input_width()) throw ArgumentError("forward: input width mismatch");
    Matrix cur = x, next;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        dense_forward(params.layers[l], cur, next, l + 1 == params.layers.size());
        std::swap(cur, next);
    }
    return cur;
}

double loss(const NetworkParams& params, const Matrix& x, const Matrix& y) {
    check_batch(params, x, y);
    return mse(forward_batch(params, x), y);
}

Gradient gradient(const NetworkParams& params, const Matrix& x, const Matrix& y, double* loss_out) {
    check_batch(params, x, y);
    const auto acts = forward_all(params, x);
    const Matrix& pred = acts.back();
    if (loss_out) *loss_out = mse(pred, y);

    const std::size_t n = x.rows();
    const double scale = 2.0 / static_cast<double>(n * y.cols());

    // delta = dL/dz for the output layer (sigmoid)
    Matrix delta(n, pred.cols());
    for (std::size_t i = 0; i < pred.data().size(); ++i) {
        const double s = pred.data()[i];
        delta.data()[i] = scale * (s - y.data()[i]) * s * (1.0 - s);
    }

    Gradient g = zeros_like(params);
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const Layer& layer = params.layers[l];
        const Matrix& a_in = acts[l];
        const std::size_t fan_in = layer.weights.cols();
        const std::size_t fan_out = layer.weights.rows();
        Layer& gl = g.layers[l];
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r).data();
            const double* a = a_in.row(r).data();
            for (std::size_t o = 0; o < fan_out; ++o) {
                double* gw = gl.weights.row(o).data();
                const double dv = d[o];
                gl.biases[o] += dv;
                for (std::size_t i = 0; i < fan_in; ++i) gw[i] += dv * a[i];
            }
        }
        if (l == 0) break;
        Matrix prev(n, fan_in);
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r).data();
            double* p = prev.row(r).data();
            for (std::size_t o = 0; o < fan_out; ++o) {
                const double* w = layer.weights.row(o).data();
                const double dv = d[o];
                for (std::size_t i = 0; i < fan_in; ++i) p[i] += dv * w[i];
            }
            const double* a = a_in.row(r).data();
            for (std::size_t i = 0; i < fan_in; ++i) p[i] *= 1.0 - a[i] * a[i];
        }
        delta = std::move(prev);
    }
    return g;
}

TrainResult train(const NetworkSpec& spec, const TrainConfig& config, const Matrix& x, const Matrix& y) {
    config.validate();
    for (double v : y.data())
        if (!(v >= 0.0 && v <= 1.0))
            throw ArgumentError("train: targets must be scaled into [0, 1] before training");

    TrainResult result{init(spec), {}};
    check_batch(result.params, x, y);
    result.loss_trace.reserve(config.epochs + 1);

    Gradient velocity = zeros_like(result.params);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double current = 0.0;
        const Gradient g = gradient(result.params, x, y, &current);
        result.loss_trace.push_back(current);
        for (std::size_t l = 0; l < g.layers.size(); ++l) {
            auto update = [&](std::vector<double>& theta, std::vector<double>& v, const std::vector<double>& grad) {
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    v[i] = config.momentum * v[i] - config.learning_rate * grad[i];
                    theta[i] += v[i];
                }
            };
            update(result.params.layers[l].weights.data(), velocity.layers[l].weights.data(),
                   g.layers[l].weights.data());
            update(result.params.layers[l].biases, velocity.layers[l].biases, g.layers[l].biases);
        }
    }
    result.loss_trace.push_back(loss(result.params, x, y));
    return result;
}

nlohmann::json to_json(const NetworkParams& params) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : params.layers) {
        nlohmann::json w = nlohmann::json::array();
        for (std::size_t o = 0; o < layer.weights.rows(); ++o) {
            auto row = layer.weights.row(o);
            w.push_back(std::vector<double>(row.begin(), row.end()));
        }
        layers.push_back({{"weights", std::move(w)}, {"biases", layer.biases}});
    }
    return layers;
}

NetworkParams params_from_json(const nlohmann::json& j) {
    NetworkParams params;
    for (const auto& jl : j) {
        auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
        Layer layer{Matrix::from_rows(rows), jl.at("biases").get<std::vector<double>>()};
        if (layer.weights.rows() != layer.biases.size())
            throw ArgumentError("network json: bias count does not match weight rows");
        if (!params.layers.empty() && params.layers.back().weights.rows() != layer.weights.cols())
            throw ArgumentError("network json: inconsistent layer shapes");
        params.layers.push_back(std::move(layer));
    }
    if (params.layers.empty()) throw ArgumentError("network json: no layers");
    return params;
}

}  // namespace formulab::deepnet
