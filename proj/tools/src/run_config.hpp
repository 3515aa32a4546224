#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/data_model.hpp"
#include "formulab/model_artifact.hpp"
#include "formulab/splitting.hpp"

namespace formulab::cli {

// Bad flags, bad config file, inconsistent options. Exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data or artifact unusable. Exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SynthSection {
    TaskKind task = TaskKind::ofdf_like;
    std::size_t records = 0;  // 0: 131 (ofdf) or 145 (srmt)
    std::size_t groups = 0;   // 0: 13 (ofdf) or 29 (srmt)
    std::vector<std::size_t> group_sizes;  // overrides `groups` when set
    double noise = 3.0;
    bool linearized = false;
};

// Fills zero records/groups with the task's corpus shape.
void apply_task_defaults(SynthSection& s);

struct SplitSection {
    std::string strategy = "mdfis";  // random | manual | maxdissim | mdfis
    std::size_t validation = 20;
    std::size_t test = 20;
    std::optional<double> fraction;  // random only; held-out share instead of fixed sizes
    std::size_t repeats = 1;
    std::string ids;  // manual only
    double alpha = 0.5;
    std::size_t min_group = 4;
    std::size_t initial_size = 5;
    std::size_t candidates = 10000;
};

// One model to train. Keys besides `name` are hyperparameters; the ones that
// do not apply to the model are ignored.
struct ModelSection {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
};

struct RunConfig {
    std::string dataset;
    std::string schema;
    std::string split_file;
    std::optional<SynthSection> synth;
    SplitSection split;
    std::vector<ModelSection> models;
    std::string output;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool plots = false;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Default output directory: $FORMULAB_OUT, else "formulab_out".
std::string default_output_dir();

ModelRequest model_request(const ModelSection& section, TaskKind task, std::uint64_t seed);
// Per-model seed derived from the run seed and the model name.
std::uint64_t model_seed(std::uint64_t run_seed, const std::string& name);

splitting::MdfisConfig mdfis_config(const SplitSection& s);
// Validates strategy-specific fields.
void check_split_section(const SplitSection& s);

}  // namespace formulab::cli
