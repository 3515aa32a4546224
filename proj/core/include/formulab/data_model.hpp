#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/matrix.hpp"

namespace formulab {

enum class ColumnKind { numeric, categorical };

// OFDF-like: one disintegration time in seconds. SRMT-like: cumulative
// percent released at each dissolution time point.
enum class TaskKind { ofdf_like, srmt_like };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

struct FeatureColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;

    friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

struct DatasetSchema {
    std::string id_column = "record_id";
    std::string group_column;
    std::vector<FeatureColumn> features;
    std::vector<std::string> targets;
    TaskKind task_kind = TaskKind::ofdf_like;
    // Encode categoricals as indicator columns instead of integer codes.
    bool one_hot = false;

    void validate() const;
    // Inclusive physical upper bound for target values (200 s or 100 %).
    double target_upper_bound() const;

    friend bool operator==(const DatasetSchema&, const DatasetSchema&) = default;
};

nlohmann::json to_json(const DatasetSchema& schema);
DatasetSchema schema_from_json(const nlohmann::json& j);
DatasetSchema load_schema(const std::filesystem::path& path);
void save_schema(const DatasetSchema& schema, const std::filesystem::path& path);

// The nine API descriptors, in canonical order.
struct DescriptorSet {
    static constexpr std::array<std::string_view, 9> names = {
        "molecular_weight", "xlogp3",           "h_bond_donors",
        "h_bond_acceptors", "rotatable_bonds",  "topological_polar_surface_area",
        "heavy_atom_count", "complexity",       "log_s"};

    std::array<double, 9> values{};

    // Finite values; count fields are non-negative integers.
    void validate() const;
    static bool is_count(std::size_t index);
};

struct FormulationRecord {
    std::string record_id;
    std::string group_id;
    std::map<std::string, std::string> categoricals;
    std::map<std::string, double> numerics;
    std::vector<double> targets;

    friend bool operator==(const FormulationRecord&, const FormulationRecord&) = default;
};

// Per-column vocabulary: codes 1..K over the sorted distinct labels, 0 for an
// empty label.
struct CategoryTable {
    std::string column;
    std::vector<std::string> labels;

    int code(const std::string& label) const;

    friend bool operator==(const CategoryTable&, const CategoryTable&) = default;
};

class CategoryEncoder {
public:
    CategoryEncoder() = default;

    static CategoryEncoder fit(const DatasetSchema& schema, std::span<const FormulationRecord> records);

    std::vector<std::string> encoded_names(const DatasetSchema& schema) const;
    Matrix transform(const DatasetSchema& schema, std::span<const FormulationRecord> records) const;

    const std::vector<CategoryTable>& tables() const { return tables_; }
    const CategoryTable& table(const std::string& column) const;
    bool one_hot() const { return one_hot_; }

    friend bool operator==(const CategoryEncoder&, const CategoryEncoder&) = default;
    friend nlohmann::json to_json(const CategoryEncoder& encoder);
    friend CategoryEncoder encoder_from_json(const nlohmann::json& j);

private:
    std::vector<CategoryTable> tables_;
    bool one_hot_ = false;
};

nlohmann::json to_json(const CategoryEncoder& encoder);
CategoryEncoder encoder_from_json(const nlohmann::json& j);

struct ColumnRange {
    std::string name;
    double min = 0.0;
    double max = 0.0;

    bool constant() const { return max == min; }
    double scale(double x) const { return constant() ? 0.0 : (x - min) / (max - min); }
    double invert(double s) const { return constant() ? min : min + s * (max - min); }

    friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
};

struct ScalingParams {
    std::vector<ColumnRange> features;
    std::vector<ColumnRange> targets;

    friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

nlohmann::json to_json(const ScalingParams& params);
ScalingParams scaling_from_json(const nlohmann::json& j);

/// Immutable, validated collection of records sharing one schema. Holds the
/// encoded feature matrix and the target matrix; after apply_scaling both are
/// on the scaled axis and scaling() is set.
class Dataset {
public:
    enum class Targets { required, optional };

    // Validates the records and fits the category encoder on them.
    static Dataset build(DatasetSchema schema, std::vector<FormulationRecord> records,
                         Targets targets = Targets::required);
    // Validates the records and encodes with a previously fitted encoder.
    static Dataset build(DatasetSchema schema, std::vector<FormulationRecord> records,
                         CategoryEncoder encoder, Targets targets = Targets::required);

    const DatasetSchema& schema() const { return schema_; }
    const std::vector<FormulationRecord>& records() const { return records_; }
    const FormulationRecord& record(std::size_t i) const { return records_[i]; }
    std::size_t size() const { return records_.size(); }

    const Matrix& features() const { return features_; }
    const Matrix& targets() const { return targets_; }
    bool has_targets() const { return targets_.cols() == schema_.targets.size() && !schema_.targets.empty(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const CategoryEncoder& encoder() const { return encoder_; }
    const std::optional<ScalingParams>& scaling() const { return scaling_; }

    const std::map<std::string, std::vector<std::size_t>>& group_index() const { return group_index_; }
    const std::string& group_of(std::size_t i) const { return records_[i].group_id; }
    std::optional<std::size_t> index_of(const std::string& record_id) const;

private:
    friend Dataset apply_scaling(const Dataset& ds, const ScalingParams& params);

    DatasetSchema schema_;
    std::vector<FormulationRecord> records_;
    CategoryEncoder encoder_;
    std::vector<std::string> feature_names_;
    Matrix features_;
    Matrix targets_;
    std::map<std::string, std::vector<std::size_t>> group_index_;
    std::map<std::string, std::size_t> id_index_;
    std::optional<ScalingParams> scaling_;
};

Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema,
                 Dataset::Targets targets = Dataset::Targets::required);
Dataset parse_csv(std::istream& in, const DatasetSchema& schema,
                  Dataset::Targets targets = Dataset::Targets::required);
std::vector<FormulationRecord> read_records(std::istream& in, const DatasetSchema& schema,
                                            Dataset::Targets targets = Dataset::Targets::required);
void write_csv(std::ostream& out, const DatasetSchema& schema, std::span<const FormulationRecord> records);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Refits the category codes on the dataset's own records.
Dataset encode_categoricals(const Dataset& ds);
// Re-encodes with a stored code table (prediction time).
Dataset encode_categoricals(const Dataset& ds, const CategoryEncoder& encoder);

/// Min-max ranges over the given rows only. SRMT-like targets use the fixed
/// range (0, 100); OFDF-like targets use the observed training range.
ScalingParams fit_scaling(const Dataset& ds, std::span<const std::size_t> train_indices);

// x' = (x - min) / (max - min), no clipping; constant columns map to 0.
Dataset apply_scaling(const Dataset& ds, const ScalingParams& params);
Matrix scale_features(const Matrix& features, const ScalingParams& params);
Matrix scale_targets(const Matrix& targets, const ScalingParams& params);

std::vector<double> invert_target_scaling(std::span<const double> values, const ScalingParams& params);
Matrix invert_target_scaling(const Matrix& values, const ScalingParams& params);

}  // namespace formulab
