#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "formulab/baselines.hpp"
#include "formulab/errors.hpp"
#include "formulab/random.hpp"

namespace formulab::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {"dataset", "schema", "split_file", "synth", "split",
                                        "models",  "output", "seed",       "jobs",  "plots"};
const std::set<std::string> kSynthKeys = {"task", "records", "groups", "group_sizes", "noise", "linearized"};
const std::set<std::string> kSplitKeys = {"strategy", "validation", "test",         "fraction",  "repeats",
                                          "ids",      "alpha",      "min_group", "initial_size", "candidates"};
const std::set<std::string> kModelKeys = {"name",   "k",             "components", "depth",         "trees",
                                          "feature_fraction", "hidden", "epochs",   "learning_rate", "momentum",
                                          "hidden_layers",    "hidden_width"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

json to_json(const RunConfig& cfg) {
    json j = {{"dataset", cfg.dataset}, {"schema", cfg.schema}, {"split_file", cfg.split_file},
              {"output", cfg.output},   {"seed", cfg.seed},     {"jobs", cfg.jobs},
              {"plots", cfg.plots}};
    if (cfg.synth) {
        const auto& s = *cfg.synth;
        j["synth"] = {{"task", to_string(s.task)}, {"records", s.records},         {"groups", s.groups},
                      {"group_sizes", s.group_sizes}, {"noise", s.noise}, {"linearized", s.linearized}};
    }
    const auto& s = cfg.split;
    j["split"] = {{"strategy", s.strategy}, {"validation", s.validation}, {"test", s.test},
                  {"repeats", s.repeats},   {"ids", s.ids},               {"alpha", s.alpha},
                  {"min_group", s.min_group}, {"initial_size", s.initial_size}, {"candidates", s.candidates}};
    if (s.fraction) j["split"]["fraction"] = *s.fraction;
    j["models"] = json::array();
    for (const auto& m : cfg.models) {
        json e = m.params;
        e["name"] = m.name;
        j["models"].push_back(e);
    }
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    try {
        check_keys(j, kTopKeys, "run config");
        read(j, "dataset", cfg.dataset);
        read(j, "schema", cfg.schema);
        read(j, "split_file", cfg.split_file);
        read(j, "output", cfg.output);
        read(j, "seed", cfg.seed);
        read(j, "jobs", cfg.jobs);
        read(j, "plots", cfg.plots);
        if (j.contains("synth")) {
            const auto& js = j.at("synth");
            check_keys(js, kSynthKeys, "synth section");
            SynthSection s;
            if (js.contains("task")) s.task = parse_task_kind(js.at("task").get<std::string>());
            read(js, "records", s.records);
            read(js, "groups", s.groups);
            read(js, "group_sizes", s.group_sizes);
            read(js, "noise", s.noise);
            read(js, "linearized", s.linearized);
            cfg.synth = s;
        }
        if (j.contains("split")) {
            const auto& js = j.at("split");
            check_keys(js, kSplitKeys, "split section");
            auto& s = cfg.split;
            read(js, "strategy", s.strategy);
            read(js, "validation", s.validation);
            read(js, "test", s.test);
            if (js.contains("fraction") && !js.at("fraction").is_null()) s.fraction = js.at("fraction").get<double>();
            read(js, "repeats", s.repeats);
            read(js, "ids", s.ids);
            read(js, "alpha", s.alpha);
            read(js, "min_group", s.min_group);
            read(js, "initial_size", s.initial_size);
            read(js, "candidates", s.candidates);
        }
        if (j.contains("models")) {
            for (const auto& jm : j.at("models")) {
                ModelSection m;
                if (jm.is_string()) {
                    m.name = jm.get<std::string>();
                } else {
                    check_keys(jm, kModelKeys, "model entry");
                    m.name = jm.at("name").get<std::string>();
                    m.params = jm;
                    m.params.erase("name");
                }
                cfg.models.push_back(std::move(m));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

void apply_task_defaults(SynthSection& s) {
    const bool ofdf = s.task == TaskKind::ofdf_like;
    if (s.records == 0) s.records = ofdf ? 131 : 145;
    if (s.groups == 0) s.groups = ofdf ? 13 : 29;
}

std::string default_output_dir() {
    const char* env = std::getenv("FORMULAB_OUT");
    return env && *env ? std::string(env) : std::string("formulab_out");
}

std::uint64_t model_seed(std::uint64_t run_seed, const std::string& name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
    return derive_seed(run_seed, h);
}

ModelRequest model_request(const ModelSection& section, TaskKind task, std::uint64_t seed) {
    ModelRequest r;
    try {
        r = default_request(section.name, task, seed);
    } catch (const ArgumentError& e) {
        throw ConfigError("unknown model '" + section.name + "'");
    }
    const auto& p = section.params;
    try {
        if (r.is_dnn()) {
            if (p.contains("hidden_layers")) r.dnn_overrides.hidden_layers = p.at("hidden_layers").get<std::size_t>();
            if (p.contains("hidden_width")) r.dnn_overrides.hidden_width = p.at("hidden_width").get<std::size_t>();
            if (p.contains("epochs")) r.dnn_overrides.epochs = p.at("epochs").get<std::size_t>();
        } else {
            auto& s = *r.regressor;
            read(p, "k", s.knn_neighbors);
            read(p, "components", s.pls_components);
            read(p, "depth", s.rf_max_depth);
            read(p, "trees", s.rf_trees);
            read(p, "feature_fraction", s.rf_feature_fraction);
            read(p, "hidden", s.ann_hidden);
            read(p, "epochs", s.ann_train.epochs);
            read(p, "learning_rate", s.ann_train.learning_rate);
            read(p, "momentum", s.ann_train.momentum);
            s.validate();
        }
    } catch (const json::exception& e) {
        throw ConfigError("model '" + section.name + "': " + e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError("model '" + section.name + "': " + e.what());
    }
    return r;
}

splitting::MdfisConfig mdfis_config(const SplitSection& s) {
    splitting::MdfisConfig c;
    c.selection_size = s.validation;
    c.alpha = s.alpha;
    c.min_group_size = s.min_group;
    c.initial_set_size = s.initial_size;
    c.n_initial_candidates = s.candidates;
    return c;
}

void check_split_section(const SplitSection& s) {
    static const std::set<std::string> kStrategies = {"random", "manual", "maxdissim", "mdfis"};
    if (!kStrategies.count(s.strategy))
        throw ConfigError("unknown split strategy '" + s.strategy + "' (random, manual, maxdissim, mdfis)");
    if (s.repeats < 1) throw ConfigError("repeats must be >= 1");
    if (s.strategy == "manual" && s.ids.empty()) throw ConfigError("manual split needs --ids");
    if (s.strategy == "random" && s.fraction && !(*s.fraction > 0.0 && *s.fraction < 1.0))
        throw ConfigError("fraction must be in (0, 1)");
    if (s.strategy == "mdfis" || s.strategy == "maxdissim") {
        if (s.validation < 1) throw ConfigError("validation size must be >= 1");
        if (s.initial_size < 1) throw ConfigError("initial set size must be >= 1");
    }
    if (s.strategy == "mdfis") {
        try {
            mdfis_config(s).validate();
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
}

}  // namespace formulab::cli
