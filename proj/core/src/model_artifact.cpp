#include "formulab/model_artifact.hpp"

#include <fstream>
#include <optional>

#include "formulab/errors.hpp"

namespace formulab {

using nlohmann::json;

Matrix ModelArtifact::predict_scaled(const Matrix& scaled_features) const {
    return std::visit(
        [&](const auto& m) -> Matrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DnnModel>)
                return deepnet::forward_batch(m.params, scaled_features);
            else
                return m.predict(scaled_features);
        },
        model);
}

Matrix ModelArtifact::predict(const Dataset& ds) const {
    if (ds.scaling()) throw ArgumentError("predict: expects an unscaled dataset");
    // Codes must come from the stored tables, not from the incoming records.
    std::optional<Dataset> recoded;
    if (!(ds.encoder() == encoder)) recoded = encode_categoricals(ds, encoder);
    const Dataset& in = recoded ? *recoded : ds;
    const auto& names = in.feature_names();
    if (names.size() != scaling.features.size())
        throw SchemaError("predict: dataset feature width does not match the model");
    for (std::size_t c = 0; c < names.size(); ++c)
        if (names[c] != scaling.features[c].name)
            throw SchemaError("predict: feature column '" + names[c] + "' does not match the model");
    return invert_target_scaling(predict_scaled(scale_features(in.features(), scaling)), scaling);
}

json to_json(const ModelArtifact& artifact) {
    json j = {{"format_version", kModelFormatVersion},
              {"name", artifact.name},
              {"schema", to_json(artifact.schema)},
              {"encoding", to_json(artifact.encoder)},
              {"scaling", to_json(artifact.scaling)}};
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DnnModel>) {
                j["kind"] = "dnn";
                j["preset"] = deepnet::preset_label(m.preset);
                j["layer_widths"] = m.spec.layer_widths;
                j["seed"] = m.spec.seed;
                j["hyperparameters"] = {{"learning_rate", m.config.learning_rate},
                                        {"momentum", m.config.momentum},
                                        {"epochs", m.config.epochs}};
                j["network"] = deepnet::to_json(m.params);
            } else {
                j["kind"] = baselines::to_string(m.spec.kind);
                j["hyperparameters"] = baselines::to_json(m.spec);
                j["targets"] = baselines::to_json(m)["models"];
            }
        },
        artifact.model);
    return j;
}

ModelArtifact artifact_from_json(const json& j) {
    if (!j.contains("format_version")) throw SchemaError("model file lacks format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw SchemaError("unsupported model format_version " + std::to_string(version));
    ModelArtifact a;
    a.name = j.at("name").get<std::string>();
    a.schema = schema_from_json(j.at("schema"));
    a.encoder = encoder_from_json(j.at("encoding"));
    a.scaling = scaling_from_json(j.at("scaling"));
    if (j.at("kind").get<std::string>() == "dnn") {
        DnnModel m;
        m.preset = deepnet::parse_preset(j.at("preset").get<std::string>());
        m.spec.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
        m.spec.seed = j.at("seed").get<std::uint64_t>();
        const auto& h = j.at("hyperparameters");
        m.config = {h.at("learning_rate").get<double>(), h.at("momentum").get<double>(),
                    h.at("epochs").get<std::size_t>()};
        m.params = deepnet::params_from_json(j.at("network"));
        a.model = std::move(m);
    } else {
        a.model = baselines::multi_from_json({{"spec", j.at("hyperparameters")}, {"models", j.at("targets")}});
    }
    return a;
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path.string() + "'");
    try {
        return artifact_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw SchemaError("malformed model file '" + path.string() + "': " + e.what());
    }
}

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(artifact).dump() << '\n';
}

ModelRequest default_request(const std::string& name, TaskKind task, std::uint64_t seed) {
    ModelRequest r;
    r.name = name;
    r.seed = seed;
    if (r.is_dnn()) {
        deepnet::parse_preset(name);
        return r;
    }
    auto spec = baselines::RegressorSpec::defaults(baselines::parse_regressor_kind(name), task);
    spec.seed = seed;
    r.regressor = spec;
    return r;
}

TrainedModel train_model(const ModelRequest& request, const Dataset& ds, const splitting::SplitAssignment& split) {
    if (ds.scaling()) throw ArgumentError("train_model: expects an unscaled dataset");
    split.check_partition(ds.size());
    const ScalingParams scaling = fit_scaling(ds, split.train);
    const Dataset scaled = apply_scaling(ds, scaling);
    const Matrix x = scaled.features().select_rows(split.train);
    const Matrix y = scaled.targets().select_rows(split.train);

    TrainedModel out{{request.name, ds.schema(), ds.encoder(), scaling, {}}, {}};
    if (request.is_dnn()) {
        const auto name = deepnet::parse_preset(request.name);
        const auto p = deepnet::preset(name, x.cols(), y.cols(), request.dnn_overrides, request.seed);
        auto result = deepnet::train(p.spec, p.config, x, y);
        out.artifact.model = DnnModel{name, p.spec, p.config, std::move(result.params)};
        out.loss_trace = std::move(result.loss_trace);
    } else {
        auto spec = request.regressor.value_or(baselines::RegressorSpec::defaults(
            baselines::parse_regressor_kind(request.name), ds.schema().task_kind));
        spec.seed = request.seed;
        out.artifact.model = baselines::fit_multi(spec, x, y);
    }
    return out;
}

}  // namespace formulab
