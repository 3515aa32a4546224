#include "cli.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "formulab/data_model.hpp"
#include "formulab/errors.hpp"
#include "formulab/metrics.hpp"
#include "formulab/model_artifact.hpp"
#include "formulab/splitting.hpp"
#include "formulab/synthgen.hpp"
#include "formulab/version.hpp"
#include "manifest.hpp"
#include "report.hpp"
#include "run_config.hpp"

namespace formulab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raw flag values; only the ones given on the command line override the
// config file.
struct Flags {
    std::optional<std::string> config, data, schema, split, output, ids, strategy, task, group_sizes, input,
        predictions;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs, val, test, repeats, min_group, initial_size, candidates, records, groups;
    std::optional<double> fraction, alpha, noise;
    bool plots = false;
    bool linearized = false;
    bool write_generation = false;

    std::vector<std::string> models;
    std::vector<std::string> model_files;
    std::optional<std::size_t> k, components, depth, trees, hidden, epochs, hidden_layers, hidden_width;
    std::optional<double> feature_fraction, learning_rate, momentum;
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("bad group size list '" + text + "'");
        }
    }
    return out;
}

json hyperparameter_overrides(const Flags& f) {
    json p = json::object();
    auto put = [&](const char* key, const auto& v) {
        if (v) p[key] = *v;
    };
    put("k", f.k);
    put("components", f.components);
    put("depth", f.depth);
    put("trees", f.trees);
    put("feature_fraction", f.feature_fraction);
    put("hidden", f.hidden);
    put("epochs", f.epochs);
    put("learning_rate", f.learning_rate);
    put("momentum", f.momentum);
    put("hidden_layers", f.hidden_layers);
    put("hidden_width", f.hidden_width);
    return p;
}

RunConfig resolve(const Flags& f) {
    RunConfig cfg = f.config ? load_run_config(*f.config) : RunConfig{};
    auto set = [](auto& into, const auto& v) {
        if (v) into = *v;
    };
    set(cfg.dataset, f.data);
    set(cfg.schema, f.schema);
    set(cfg.split_file, f.split);
    set(cfg.output, f.output);
    set(cfg.seed, f.seed);
    set(cfg.jobs, f.jobs);
    if (f.plots) cfg.plots = true;

    auto& s = cfg.split;
    set(s.strategy, f.strategy);
    set(s.validation, f.val);
    set(s.test, f.test);
    set(s.repeats, f.repeats);
    set(s.ids, f.ids);
    set(s.alpha, f.alpha);
    set(s.min_group, f.min_group);
    set(s.initial_size, f.initial_size);
    set(s.candidates, f.candidates);
    if (f.fraction) s.fraction = f.fraction;

    if (f.task || f.records || f.groups || f.group_sizes || f.noise || f.linearized) {
        if (!cfg.synth) cfg.synth = SynthSection{};
        auto& y = *cfg.synth;
        if (f.task) {
            try {
                y.task = parse_task_kind(*f.task);
            } catch (const std::exception&) {
                throw ConfigError("unknown task '" + *f.task + "' (ofdf, srmt)");
            }
        }
        set(y.records, f.records);
        set(y.groups, f.groups);
        set(y.noise, f.noise);
        if (f.group_sizes) y.group_sizes = parse_size_list(*f.group_sizes);
        if (f.linearized) y.linearized = true;
    }

    if (!f.models.empty()) {
        cfg.models.clear();
        for (const auto& name : f.models) cfg.models.push_back({name, json::object()});
    }
    if (cfg.synth) apply_task_defaults(*cfg.synth);
    const json overrides = hyperparameter_overrides(f);
    for (auto& m : cfg.models) m.params.update(overrides);

    if (cfg.output.empty()) cfg.output = default_output_dir();
    if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
    return cfg;
}

void write_text(const fs::path& path, const std::string& text, RunManifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.close();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    manifest.add_artifact(path);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("no dataset given (--data)");
    if (cfg.schema.empty()) throw ConfigError("no schema given (--schema)");
    return load_csv(cfg.dataset, load_schema(cfg.schema));
}

splitting::SplitAssignment load_split_file(const std::string& path, const Dataset& ds) {
    if (path.empty()) throw ConfigError("no split file given (--split)");
    try {
        return splitting::load_split(path, ds);
    } catch (const IoError& e) {
        throw DataError(e.what());
    } catch (const std::exception& e) {
        throw DataError("split file '" + path + "': " + e.what());
    }
}

ModelArtifact load_model_file(const std::string& path) {
    try {
        return load_artifact(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

synthgen::SynthConfig synth_config(const SynthSection& s, std::uint64_t seed) {
    synthgen::SynthConfig c;
    c.noise_sd = s.noise;
    c.seed = seed;
    c.linearized = s.linearized;
    try {
        if (s.group_sizes.empty()) {
            c.n_records = s.records;
            c.group_sizes = synthgen::default_group_sizes(s.records, s.groups);
        } else {
            c.group_sizes = s.group_sizes;
            c.n_records = 0;
            for (auto g : s.group_sizes) c.n_records += g;
        }
        c.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& body) {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(jobs, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---- steps shared by the commands and the pipeline ----

struct SynthOutputs {
    fs::path dataset;
    fs::path schema;
};

SynthOutputs do_synth(const RunConfig& cfg, bool write_generation, RunManifest& manifest, std::ostream& out) {
    if (!cfg.synth) throw ConfigError("synth needs --task");
    const auto sc = synth_config(*cfg.synth, cfg.seed);
    const fs::path dir = cfg.output;
    ensure_dir(dir);
    manifest.phase("generate");
    const auto ds = synthgen::generate(cfg.synth->task, sc);
    SynthOutputs paths{dir / "dataset.csv", dir / "schema.json"};
    std::ostringstream csv;
    write_csv(csv, ds.schema(), ds.records());
    write_text(paths.dataset, csv.str(), manifest);
    write_text(paths.schema, to_json(ds.schema()).dump(2) + "\n", manifest);
    manifest.add_extra("synth", synthgen::to_json(sc));
    if (write_generation) {
        json g = synthgen::to_json(sc);
        g["task"] = to_string(cfg.synth->task);
        g["dataset_sha256"] = sha256_file(paths.dataset);
        write_text(dir / "generation.json", g.dump(2) + "\n", manifest);
    }
    out << "wrote " << ds.size() << " records in " << ds.group_index().size() << " groups to "
        << paths.dataset.string() << '\n';
    return paths;
}

splitting::SplitAssignment single_split(const RunConfig& cfg, const Dataset& ds) {
    const auto& s = cfg.split;
    if (s.strategy == "random") {
        if (s.fraction) return splitting::random_split(ds, *s.fraction, 1, cfg.seed).front();
        return splitting::random_split_sizes(ds.size(), s.validation, s.test, 1, cfg.seed).front();
    }
    if (s.strategy == "manual") {
        std::ifstream in(s.ids);
        if (!in) throw IoError("cannot open id list '" + s.ids + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("id list '" + s.ids + "' is not valid JSON: " + e.what());
        }
        auto ids = [&](const char* key) {
            try {
                return j.value(key, std::vector<std::string>{});
            } catch (const json::exception& e) {
                throw ConfigError("id list '" + s.ids + "': " + e.what());
            }
        };
        return splitting::manual_split(ds, ids("validation"), ids("test"));
    }
    if (s.strategy == "maxdissim") {
        const auto dt = splitting::DistanceTable::from_dataset(ds);
        return splitting::max_dissim_three_way(ds, dt, s.validation, s.test, s.initial_size, cfg.seed);
    }
    return splitting::mdfis_three_way(ds, mdfis_config(s), cfg.seed, s.test);
}

fs::path do_split(const RunConfig& cfg, const Dataset& ds, RunManifest& manifest, std::ostream& out) {
    check_split_section(cfg.split);
    if (cfg.split.repeats > 1 && cfg.split.strategy != "random")
        throw ConfigError("--repeats applies to the random strategy only");
    ensure_dir(cfg.output);
    manifest.phase("split");
    const fs::path dir = cfg.output;
    if (cfg.split.repeats > 1) {
        const auto& s = cfg.split;
        const auto splits = s.fraction ? splitting::random_split(ds, *s.fraction, s.repeats, cfg.seed)
                                       : splitting::random_split_sizes(ds.size(), s.validation, s.test, s.repeats,
                                                                       cfg.seed);
        json all = json::array();
        for (const auto& sp : splits) all.push_back(splitting::to_json(sp, ds));
        const auto path = dir / "splits.json";
        write_text(path, all.dump(2) + "\n", manifest);
        out << "wrote " << splits.size() << " assignments to " << path.string() << '\n';
        return path;
    }
    const auto split = single_split(cfg, ds);
    const auto path = dir / "split.json";
    write_text(path, splitting::to_json(split, ds).dump(2) + "\n", manifest);
    out << "train " << split.train.size() << " / validation " << split.validation.size() << " / test "
        << split.test.size() << " -> " << path.string() << '\n';
    return path;
}

std::vector<fs::path> do_train(const RunConfig& cfg, const Dataset& ds, const splitting::SplitAssignment& split,
                               RunManifest& manifest, std::ostream& out) {
    if (cfg.models.empty()) throw ConfigError("no models requested (--model)");
    std::set<std::string> seen;
    std::vector<ModelRequest> requests;
    for (const auto& m : cfg.models) {
        if (!seen.insert(m.name).second) throw ConfigError("model '" + m.name + "' requested twice");
        requests.push_back(model_request(m, ds.schema().task_kind, model_seed(cfg.seed, m.name)));
    }
    ensure_dir(cfg.output);
    manifest.phase("train");
    std::vector<std::optional<TrainedModel>> trained(requests.size());
    parallel_for(requests.size(), cfg.jobs, [&](std::size_t i) { trained[i] = train_model(requests[i], ds, split); });

    const fs::path dir = cfg.output;
    std::vector<fs::path> paths;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& name = requests[i].name;
        const auto path = dir / ("model_" + name + ".json");
        write_text(path, to_json(trained[i]->artifact).dump() + "\n", manifest);
        paths.push_back(path);
        if (!trained[i]->loss_trace.empty()) {
            std::string csv = "epoch,loss\n";
            const auto& trace = trained[i]->loss_trace;
            for (std::size_t e = 0; e < trace.size(); ++e) csv += std::to_string(e) + "," + format_double(trace[e]) + "\n";
            write_text(dir / ("loss_" + name + ".csv"), csv, manifest);
        }
        out << "trained " << name << " -> " << path.string() << '\n';
    }
    return paths;
}

void do_evaluate(const RunConfig& cfg, const Dataset& ds, const splitting::SplitAssignment& split,
                 const std::vector<fs::path>& model_files, RunManifest& manifest, std::ostream& out) {
    if (model_files.empty()) throw ConfigError("no model files given (--model-file)");
    ensure_dir(cfg.output);
    manifest.phase("evaluate");
    const fs::path dir = cfg.output;
    std::vector<metrics::EvaluationReport> reports;
    for (const auto& file : model_files) {
        const auto artifact = load_model_file(file.string());
        if (artifact.schema.targets != ds.schema().targets)
            throw DataError("model '" + file.string() + "' was trained for different targets");
        const auto predictions = artifact.predict(ds);
        auto report = metrics::evaluate(artifact.name, predictions, ds, split, artifact.scaling);
        write_text(dir / ("report_" + artifact.name + ".json"), metrics::to_json(report).dump(2) + "\n", manifest);
        const std::pair<const char*, const metrics::SplitMetrics*> parts[] = {
            {"train", &report.train}, {"validation", &report.validation}, {"test", &report.test}};
        for (const auto& [label, m] : parts) {
            if (m->records.empty()) continue;
            std::ostringstream csv;
            metrics::write_scatter_csv(csv, *m, ds.schema().targets);
            write_text(dir / ("scatter_" + artifact.name + "_" + label + ".csv"), csv.str(), manifest);
            if (cfg.plots) {
                std::ostringstream svg;
                write_scatter_svg(svg, *m, ds.schema().task_kind, artifact.name + " - " + label + " set");
                write_text(dir / ("plot_" + artifact.name + "_" + label + ".svg"), svg.str(), manifest);
            }
        }
        reports.push_back(std::move(report));
    }
    std::ostringstream table;
    write_results_table(table, reports);
    write_text(dir / "results.txt", table.str(), manifest);
    out << table.str();
}

// ---- error handling ----

int guarded(RunManifest& manifest, const RunConfig* const& cfg, const Flags& flags, std::ostream& err,
            const std::function<void()>& body) {
    int code = kExitOk;
    std::string message;
    try {
        body();
    } catch (const UnknownCategoryError& e) {
        code = kExitPredictInput;
        message = e.what();
    } catch (const InsufficientDataError& e) {
        code = kExitData;
        message = e.what();
    } catch (const ConfigError& e) {
        code = kExitUsage;
        message = e.what();
    } catch (const ArgumentError& e) {
        code = kExitUsage;
        message = e.what();
    } catch (const SchemaError& e) {
        code = kExitUsage;
        message = e.what();
    } catch (const LookupError& e) {
        code = kExitUsage;
        message = e.what();
    } catch (const std::exception& e) {
        code = kExitData;
        message = e.what();
    }
    const fs::path dir = cfg ? cfg->output : flags.output.value_or(default_output_dir());
    if (cfg) manifest.set_config(to_json(*cfg));
    try {
        manifest.write(dir, code, message);
    } catch (const std::exception&) {
    }
    if (code != kExitOk) err << "error: " << message << '\n';
    return code;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Run configuration (JSON)");
    cmd->add_option("-o,--out", f.output, "Output directory (default $FORMULAB_OUT or ./formulab_out)");
    cmd->add_option("--seed", f.seed, "Global seed");
}

void add_data(CLI::App* cmd, Flags& f) {
    cmd->add_option("--data", f.data, "Dataset CSV");
    cmd->add_option("--schema", f.schema, "Schema JSON");
}

void add_synth_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--task", f.task, "ofdf or srmt");
    cmd->add_option("--records", f.records, "Number of records");
    cmd->add_option("--groups", f.groups, "Number of API groups (imbalanced default sizes)");
    cmd->add_option("--group-sizes", f.group_sizes, "Explicit comma-separated group sizes");
    cmd->add_option("--noise", f.noise, "Target noise standard deviation");
    cmd->add_flag("--linearized", f.linearized, "Affine target variant");
}

void add_split_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--strategy", f.strategy, "random, manual, maxdissim or mdfis");
    cmd->add_option("--val", f.val, "Validation size (default 20)");
    cmd->add_option("--test", f.test, "Test size (default 20)");
    cmd->add_option("--fraction", f.fraction, "Random: held-out fraction instead of fixed sizes");
    cmd->add_option("--repeats", f.repeats, "Random: number of assignments");
    cmd->add_option("--ids", f.ids, "Manual: JSON {\"validation\":[ids],\"test\":[ids]}");
    cmd->add_option("--alpha", f.alpha, "MD-FIS weight of the in-group mean distance");
    cmd->add_option("--min-group", f.min_group, "MD-FIS smallest group eligible for selection");
    cmd->add_option("--initial-size", f.initial_size, "Initial set size");
    cmd->add_option("--candidates", f.candidates, "MD-FIS random initial sets to score");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--model", f.models, "mlr, plsr, knn, rf, ann1, dnn-ofdf, dnn-srmt (repeatable)");
    cmd->add_option("--k", f.k, "k-NN neighbours");
    cmd->add_option("--components", f.components, "PLSR components");
    cmd->add_option("--depth", f.depth, "RF maximum depth");
    cmd->add_option("--trees", f.trees, "RF tree count");
    cmd->add_option("--feature-fraction", f.feature_fraction, "RF share of features tried per split");
    cmd->add_option("--hidden", f.hidden, "ANN1 hidden width");
    cmd->add_option("--epochs", f.epochs, "ANN1/DNN epochs");
    cmd->add_option("--learning-rate", f.learning_rate, "ANN1 learning rate");
    cmd->add_option("--momentum", f.momentum, "ANN1 momentum");
    cmd->add_option("--hidden-layers", f.hidden_layers, "DNN hidden layer count");
    cmd->add_option("--hidden-width", f.hidden_width, "DNN hidden width");
    cmd->add_option("--jobs", f.jobs, "Concurrent model fits");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"formulab: formulation property prediction workbench"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1, 1);
    Flags f;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic OFDF-like or SRMT-like dataset");
    add_common(synth, f);
    add_synth_flags(synth, f);
    synth->add_flag("--manifest", f.write_generation, "Also write generation.json with the generating parameters");

    auto* split = app.add_subcommand("split", "Split a dataset into train/validation/test");
    add_common(split, f);
    add_data(split, f);
    add_split_flags(split, f);

    auto* train = app.add_subcommand("train", "Train models on the training set of a split");
    add_common(train, f);
    add_data(train, f);
    train->add_option("--split", f.split, "Split JSON");
    add_model_flags(train, f);

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate trained models on every split");
    add_common(evaluate, f);
    add_data(evaluate, f);
    evaluate->add_option("--split", f.split, "Split JSON");
    evaluate->add_option("--model-file", f.model_files, "Model JSON (repeatable)");
    evaluate->add_flag("--plots", f.plots, "Write SVG scatter plots");

    auto* predict = app.add_subcommand("predict", "Predict targets for new records");
    predict->add_option("--model-file", f.model_files, "Model JSON")->required();
    predict->add_option("--input", f.input, "Input CSV")->required();
    predict->add_option("--predictions", f.predictions, "Output CSV (default <out>/predictions.csv)");
    predict->add_option("-o,--out", f.output, "Output directory for the manifest");

    auto* pipeline = app.add_subcommand("pipeline", "synth (if no dataset) -> split -> train -> evaluate");
    add_common(pipeline, f);
    add_data(pipeline, f);
    add_synth_flags(pipeline, f);
    add_split_flags(pipeline, f);
    add_model_flags(pipeline, f);
    pipeline->add_flag("--plots", f.plots, "Write SVG scatter plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::optional<RunConfig> resolved;
    const RunConfig* cfg = nullptr;
    auto resolve_now = [&] {
        resolved = resolve(f);
        cfg = &*resolved;
    };
    const std::string command = app.get_subcommands().front()->get_name();
    RunManifest manifest(command);

    if (command == "synth") {
        return guarded(manifest, cfg, f, err, [&] {
            resolve_now();
            do_synth(*cfg, f.write_generation, manifest, out);
        });
    }
    if (command == "split") {
        return guarded(manifest, cfg, f, err, [&] {
            resolve_now();
            check_split_section(cfg->split);
            manifest.phase("load");
            const auto ds = load_dataset(*cfg);
            do_split(*cfg, ds, manifest, out);
        });
    }
    if (command == "train") {
        return guarded(manifest, cfg, f, err, [&] {
            resolve_now();
            manifest.phase("load");
            const auto ds = load_dataset(*cfg);
            const auto sp = load_split_file(cfg->split_file, ds);
            do_train(*cfg, ds, sp, manifest, out);
        });
    }
    if (command == "evaluate") {
        return guarded(manifest, cfg, f, err, [&] {
            resolve_now();
            manifest.phase("load");
            const auto ds = load_dataset(*cfg);
            const auto sp = load_split_file(cfg->split_file, ds);
            std::vector<fs::path> files(f.model_files.begin(), f.model_files.end());
            if (files.empty())
                for (const auto& m : cfg->models) files.push_back(fs::path(cfg->output) / ("model_" + m.name + ".json"));
            do_evaluate(*cfg, ds, sp, files, manifest, out);
        });
    }
    if (command == "predict") {
        return guarded(manifest, cfg, f, err, [&] {
            resolve_now();
            manifest.phase("load");
            const auto artifact = load_model_file(f.model_files.front());
            std::ifstream in(*f.input);
            if (!in) throw IoError("cannot open input CSV '" + *f.input + "'");
            auto records = read_records(in, artifact.schema, Dataset::Targets::optional);
            const auto ds = Dataset::build(artifact.schema, std::move(records), artifact.encoder,
                                           Dataset::Targets::optional);
            manifest.phase("predict");
            const auto pred = artifact.predict(ds);
            std::string csv = artifact.schema.id_column;
            for (const auto& t : artifact.schema.targets) csv += "," + t;
            csv += "\n";
            for (std::size_t r = 0; r < ds.size(); ++r) {
                csv += ds.record(r).record_id;
                for (std::size_t c = 0; c < pred.cols(); ++c) csv += "," + format_double(pred(r, c));
                csv += "\n";
            }
            ensure_dir(cfg->output);
            const fs::path target = f.predictions ? fs::path(*f.predictions) : fs::path(cfg->output) / "predictions.csv";
            if (target.has_parent_path()) ensure_dir(target.parent_path());
            write_text(target, csv, manifest);
            out << "wrote " << ds.size() << " predictions to " << target.string() << '\n';
        });
    }
    // pipeline
    return guarded(manifest, cfg, f, err, [&] {
        resolve_now();
        RunConfig run = *cfg;
        check_split_section(run.split);
        if (run.dataset.empty()) {
            if (!run.synth) throw ConfigError("pipeline needs --data/--schema or a synth section (--task)");
            const auto paths = do_synth(run, false, manifest, out);
            run.dataset = paths.dataset.string();
            run.schema = paths.schema.string();
        }
        manifest.phase("load");
        const auto ds = load_dataset(run);
        if (run.models.empty()) {
            const std::string dnn = ds.schema().task_kind == TaskKind::ofdf_like ? "dnn-ofdf" : "dnn-srmt";
            for (const char* name : {"mlr", "plsr", "knn", "rf", "ann1"}) run.models.push_back({name, json::object()});
            run.models.push_back({dnn, json::object()});
        }
        if (run.split.repeats > 1) throw ConfigError("pipeline uses a single split; drop --repeats");
        const auto split_path = do_split(run, ds, manifest, out);
        const auto sp = load_split_file(split_path.string(), ds);
        const auto files = do_train(run, ds, sp, manifest, out);
        do_evaluate(run, ds, sp, files, manifest, out);
        resolved = run;
        cfg = &*resolved;
    });
}

}  // namespace formulab::cli
