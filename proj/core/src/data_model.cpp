#include "formulab/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "formulab/errors.hpp"

namespace formulab {
namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line, std::size_t row) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw ParseError(row, "unterminated quoted field");
    out.push_back(std::move(field));
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
    const std::string t = trim(text);
    if (t.empty()) throw ParseError(row, "missing value in numeric column '" + column + "'");
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ParseError(row, "non-numeric value '" + t + "' in column '" + column + "'");
    return v;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

bool has_descriptor_columns(const DatasetSchema& schema) {
    for (auto name : DescriptorSet::names) {
        const bool found = std::any_of(schema.features.begin(), schema.features.end(), [&](const auto& f) {
            return f.name == name && f.kind == ColumnKind::numeric;
        });
        if (!found) return false;
    }
    return true;
}

void validate_records(const DatasetSchema& schema, const std::vector<FormulationRecord>& records,
                      Dataset::Targets policy) {
    std::set<std::string> ids;
    const bool descriptors = has_descriptor_columns(schema);
    const double upper = schema.target_upper_bound();
    bool any_targets = false, all_targets = true;
    for (const auto& r : records) {
        if (r.record_id.empty()) throw IntegrityError("record with empty id");
        if (!ids.insert(r.record_id).second) throw IntegrityError("duplicate record_id '" + r.record_id + "'");
        for (const auto& f : schema.features) {
            if (f.kind == ColumnKind::numeric) {
                auto it = r.numerics.find(f.name);
                if (it == r.numerics.end())
                    throw IntegrityError("record '" + r.record_id + "' lacks numeric feature '" + f.name + "'");
                if (!std::isfinite(it->second))
                    throw IntegrityError("record '" + r.record_id + "' has non-finite '" + f.name + "'");
            } else if (!r.categoricals.contains(f.name)) {
                throw IntegrityError("record '" + r.record_id + "' lacks categorical feature '" + f.name + "'");
            }
        }
        if (descriptors) {
            DescriptorSet d;
            for (std::size_t k = 0; k < d.values.size(); ++k)
                d.values[k] = r.numerics.at(std::string(DescriptorSet::names[k]));
            try {
                d.validate();
            } catch (const ArgumentError& e) {
                throw IntegrityError("record '" + r.record_id + "': " + e.what());
            }
        }
        if (r.targets.empty()) {
            all_targets = false;
            continue;
        }
        any_targets = true;
        if (r.targets.size() != schema.targets.size())
            throw IntegrityError("record '" + r.record_id + "' has " + std::to_string(r.targets.size()) +
                                 " targets, schema declares " + std::to_string(schema.targets.size()));
        for (double t : r.targets)
            if (!(t >= 0.0 && t <= upper))
                throw IntegrityError("record '" + r.record_id + "' target " + format_double(t) +
                                     " outside [0, " + format_double(upper) + "]");
    }
    if (any_targets && !all_targets) throw IntegrityError("some records lack targets");
    if (policy == Dataset::Targets::required && !all_targets && !records.empty())
        throw IntegrityError("records lack target values");
}

}  // namespace

std::string to_string(TaskKind kind) { return kind == TaskKind::ofdf_like ? "ofdf" : "srmt"; }

TaskKind parse_task_kind(std::string_view text) {
    if (text == "ofdf" || text == "OFDF" || text == "ofdf_like" || text == "OFDF-like") return TaskKind::ofdf_like;
    if (text == "srmt" || text == "SRMT" || text == "srmt_like" || text == "SRMT-like") return TaskKind::srmt_like;
    throw ArgumentError("unknown task kind '" + std::string(text) + "'");
}

void DatasetSchema::validate() const {
    if (features.empty()) throw SchemaError("schema declares no feature columns");
    if (targets.empty()) throw SchemaError("schema declares no target columns");
    if (id_column.empty()) throw SchemaError("schema has an empty id column name");
    if (group_column.empty()) throw SchemaError("schema has no group column");
    if (task_kind == TaskKind::ofdf_like && targets.size() != 1)
        throw SchemaError("an ofdf schema has exactly one target column");
    std::set<std::string> seen;
    auto claim = [&](const std::string& name) {
        if (name.empty()) throw SchemaError("empty column name in schema");
        if (!seen.insert(name).second) throw SchemaError("column '" + name + "' appears in more than one role");
    };
    claim(id_column);
    claim(group_column);
    for (const auto& f : features) claim(f.name);
    for (const auto& t : targets) claim(t);
}

double DatasetSchema::target_upper_bound() const { return task_kind == TaskKind::ofdf_like ? 200.0 : 100.0; }

json to_json(const DatasetSchema& schema) {
    json features = json::array();
    for (const auto& f : schema.features)
        features.push_back({{"name", f.name}, {"kind", f.kind == ColumnKind::numeric ? "numeric" : "categorical"}});
    return {{"id", schema.id_column},     {"group", schema.group_column},
            {"features", features},       {"targets", schema.targets},
            {"task_kind", to_string(schema.task_kind)}, {"one_hot", schema.one_hot}};
}

DatasetSchema schema_from_json(const json& j) {
    DatasetSchema s;
    try {
        s.id_column = j.value("id", std::string("record_id"));
        s.group_column = j.at("group").get<std::string>();
        for (const auto& f : j.at("features")) {
            const auto kind = f.at("kind").get<std::string>();
            if (kind != "numeric" && kind != "categorical")
                throw SchemaError("feature '" + f.at("name").get<std::string>() + "' has unknown kind '" + kind + "'");
            s.features.push_back(
                {f.at("name").get<std::string>(), kind == "numeric" ? ColumnKind::numeric : ColumnKind::categorical});
        }
        s.targets = j.at("targets").get<std::vector<std::string>>();
        s.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
        s.one_hot = j.value("one_hot", false);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed schema: ") + e.what());
    } catch (const ArgumentError& e) {
        throw SchemaError(e.what());
    }
    s.validate();
    return s;
}

DatasetSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError("schema '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return schema_from_json(j);
}

void save_schema(const DatasetSchema& schema, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(schema).dump(2) << '\n';
}

bool DescriptorSet::is_count(std::size_t index) {
    return index == 2 || index == 3 || index == 4 || index == 6;
}

void DescriptorSet::validate() const {
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double v = values[k];
        if (!std::isfinite(v)) throw ArgumentError("descriptor '" + std::string(names[k]) + "' is not finite");
        if (is_count(k) && (v < 0.0 || std::floor(v) != v))
            throw ArgumentError("descriptor '" + std::string(names[k]) + "' must be a non-negative integer count");
    }
}

int CategoryTable::code(const std::string& label) const {
    if (label.empty()) return 0;
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) throw UnknownCategoryError(column, label);
    return static_cast<int>(it - labels.begin()) + 1;
}

CategoryEncoder CategoryEncoder::fit(const DatasetSchema& schema, std::span<const FormulationRecord> records) {
    CategoryEncoder enc;
    enc.one_hot_ = schema.one_hot;
    for (const auto& f : schema.features) {
        if (f.kind != ColumnKind::categorical) continue;
        std::set<std::string> labels;
        for (const auto& r : records) {
            auto it = r.categoricals.find(f.name);
            if (it != r.categoricals.end() && !it->second.empty()) labels.insert(it->second);
        }
        enc.tables_.push_back({f.name, {labels.begin(), labels.end()}});
    }
    return enc;
}

const CategoryTable& CategoryEncoder::table(const std::string& column) const {
    for (const auto& t : tables_)
        if (t.column == column) return t;
    throw SchemaError("no category table for column '" + column + "'");
}

std::vector<std::string> CategoryEncoder::encoded_names(const DatasetSchema& schema) const {
    std::vector<std::string> names;
    for (const auto& f : schema.features) {
        if (f.kind == ColumnKind::categorical && one_hot_) {
            for (const auto& label : table(f.name).labels) names.push_back(f.name + "=" + label);
        } else {
            names.push_back(f.name);
        }
    }
    return names;
}

Matrix CategoryEncoder::transform(const DatasetSchema& schema, std::span<const FormulationRecord> records) const {
    const auto names = encoded_names(schema);
    Matrix m(records.size(), names.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::size_t c = 0;
        for (const auto& f : schema.features) {
            if (f.kind == ColumnKind::numeric) {
                m(r, c++) = rec.numerics.at(f.name);
                continue;
            }
            const auto& tab = table(f.name);
            const int code = tab.code(rec.categoricals.at(f.name));
            if (one_hot_) {
                if (code > 0) m(r, c + static_cast<std::size_t>(code) - 1) = 1.0;
                c += tab.labels.size();
            } else {
                m(r, c++) = static_cast<double>(code);
            }
        }
    }
    return m;
}

json to_json(const CategoryEncoder& encoder) {
    json tables = json::array();
    for (const auto& t : encoder.tables_) tables.push_back({{"column", t.column}, {"labels", t.labels}});
    return {{"one_hot", encoder.one_hot_}, {"tables", tables}};
}

CategoryEncoder encoder_from_json(const json& j) {
    CategoryEncoder enc;
    enc.one_hot_ = j.at("one_hot").get<bool>();
    for (const auto& t : j.at("tables")) {
        CategoryTable tab{t.at("column").get<std::string>(), t.at("labels").get<std::vector<std::string>>()};
        if (!std::is_sorted(tab.labels.begin(), tab.labels.end()))
            throw SchemaError("category table for '" + tab.column + "' is not sorted");
        enc.tables_.push_back(std::move(tab));
    }
    return enc;
}

json to_json(const ScalingParams& params) {
    auto ranges = [](const std::vector<ColumnRange>& rs) {
        json a = json::array();
        for (const auto& r : rs) a.push_back({{"name", r.name}, {"min", r.min}, {"max", r.max}});
        return a;
    };
    return {{"features", ranges(params.features)}, {"targets", ranges(params.targets)}};
}

ScalingParams scaling_from_json(const json& j) {
    auto ranges = [](const json& a) {
        std::vector<ColumnRange> out;
        for (const auto& r : a) {
            ColumnRange cr{r.at("name").get<std::string>(), r.at("min").get<double>(), r.at("max").get<double>()};
            if (cr.max < cr.min) throw SchemaError("scaling range for '" + cr.name + "' has max < min");
            out.push_back(std::move(cr));
        }
        return out;
    };
    return {ranges(j.at("features")), ranges(j.at("targets"))};
}

Dataset Dataset::build(DatasetSchema schema, std::vector<FormulationRecord> records, Targets targets) {
    schema.validate();
    validate_records(schema, records, targets);
    auto encoder = CategoryEncoder::fit(schema, records);
    return build(std::move(schema), std::move(records), std::move(encoder), targets);
}

Dataset Dataset::build(DatasetSchema schema, std::vector<FormulationRecord> records, CategoryEncoder encoder,
                       Targets targets) {
    schema.validate();
    validate_records(schema, records, targets);
    for (const auto& f : schema.features)
        if (f.kind == ColumnKind::categorical) encoder.table(f.name);

    Dataset ds;
    ds.features_ = encoder.transform(schema, records);
    ds.feature_names_ = encoder.encoded_names(schema);
    ds.encoder_ = std::move(encoder);
    const bool with_targets = !records.empty() && !records.front().targets.empty();
    ds.targets_ = Matrix(records.size(), with_targets ? schema.targets.size() : 0);
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t t = 0; t < ds.targets_.cols(); ++t) ds.targets_(i, t) = records[i].targets[t];
        ds.group_index_[records[i].group_id].push_back(i);
        ds.id_index_[records[i].record_id] = i;
    }
    ds.schema_ = std::move(schema);
    ds.records_ = std::move(records);
    return ds;
}

std::optional<std::size_t> Dataset::index_of(const std::string& record_id) const {
    auto it = id_index_.find(record_id);
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<FormulationRecord> read_records(std::istream& in, const DatasetSchema& schema,
                                            Dataset::Targets targets) {
    schema.validate();
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty CSV: missing header row");
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    auto header = split_csv_line(line, 0);
    for (auto& h : header) h = trim(h);

    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(header[i], i);
    auto column = [&](const std::string& name) {
        auto it = pos.find(name);
        if (it == pos.end()) throw SchemaError("CSV header lacks column '" + name + "'");
        return it->second;
    };
    const std::size_t id_col = column(schema.id_column);
    const std::size_t group_col = column(schema.group_column);
    std::vector<std::size_t> feature_cols;
    for (const auto& f : schema.features) feature_cols.push_back(column(f.name));

    std::vector<std::size_t> target_cols;
    const bool any_target =
        std::any_of(schema.targets.begin(), schema.targets.end(), [&](const auto& t) { return pos.contains(t); });
    if (targets == Dataset::Targets::required || any_target)
        for (const auto& t : schema.targets) target_cols.push_back(column(t));

    std::vector<FormulationRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line, row);
        if (cells.size() != header.size())
            throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, found " +
                                      std::to_string(cells.size()));
        FormulationRecord r;
        r.record_id = trim(cells[id_col]);
        r.group_id = trim(cells[group_col]);
        if (r.record_id.empty()) throw ParseError(row, "empty record id");
        for (std::size_t k = 0; k < schema.features.size(); ++k) {
            const auto& f = schema.features[k];
            if (f.kind == ColumnKind::numeric)
                r.numerics[f.name] = parse_number(cells[feature_cols[k]], row, f.name);
            else
                r.categoricals[f.name] = trim(cells[feature_cols[k]]);
        }
        for (std::size_t k = 0; k < target_cols.size(); ++k)
            r.targets.push_back(parse_number(cells[target_cols[k]], row, schema.targets[k]));
        records.push_back(std::move(r));
    }
    return records;
}

Dataset parse_csv(std::istream& in, const DatasetSchema& schema, Dataset::Targets targets) {
    return Dataset::build(schema, read_records(in, schema, targets), targets);
}

Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema, Dataset::Targets targets) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file '" + path.string() + "'");
    return parse_csv(in, schema, targets);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const DatasetSchema& schema, std::span<const FormulationRecord> records) {
    out << quote_if_needed(schema.id_column) << ',' << quote_if_needed(schema.group_column);
    for (const auto& f : schema.features) out << ',' << quote_if_needed(f.name);
    const bool with_targets = !records.empty() && !records.front().targets.empty();
    if (with_targets)
        for (const auto& t : schema.targets) out << ',' << quote_if_needed(t);
    out << '\n';
    for (const auto& r : records) {
        out << quote_if_needed(r.record_id) << ',' << quote_if_needed(r.group_id);
        for (const auto& f : schema.features) {
            out << ',';
            if (f.kind == ColumnKind::numeric)
                out << format_double(r.numerics.at(f.name));
            else
                out << quote_if_needed(r.categoricals.at(f.name));
        }
        if (with_targets)
            for (double t : r.targets) out << ',' << format_double(t);
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_csv(out, ds.schema(), ds.records());
}

Dataset encode_categoricals(const Dataset& ds) {
    return Dataset::build(ds.schema(), ds.records(),
                          ds.has_targets() ? Dataset::Targets::required : Dataset::Targets::optional);
}

Dataset encode_categoricals(const Dataset& ds, const CategoryEncoder& encoder) {
    return Dataset::build(ds.schema(), ds.records(), encoder,
                          ds.has_targets() ? Dataset::Targets::required : Dataset::Targets::optional);
}

ScalingParams fit_scaling(const Dataset& ds, std::span<const std::size_t> train_indices) {
    if (train_indices.empty()) throw ArgumentError("fit_scaling: empty training index set");
    for (auto i : train_indices)
        if (i >= ds.size()) throw ArgumentError("fit_scaling: index " + std::to_string(i) + " out of range");
    if (ds.scaling()) throw ArgumentError("fit_scaling: dataset is already scaled");

    auto range_of = [&](const Matrix& m, std::size_t c, const std::string& name) {
        ColumnRange r{name, m(train_indices[0], c), m(train_indices[0], c)};
        for (auto i : train_indices) {
            r.min = std::min(r.min, m(i, c));
            r.max = std::max(r.max, m(i, c));
        }
        return r;
    };
    ScalingParams p;
    const auto& names = ds.feature_names();
    for (std::size_t c = 0; c < names.size(); ++c) p.features.push_back(range_of(ds.features(), c, names[c]));
    const auto& tnames = ds.schema().targets;
    if (ds.has_targets()) {
        for (std::size_t c = 0; c < tnames.size(); ++c) {
            if (ds.schema().task_kind == TaskKind::srmt_like)
                p.targets.push_back({tnames[c], 0.0, 100.0});
            else
                p.targets.push_back(range_of(ds.targets(), c, tnames[c]));
        }
    }
    return p;
}

Matrix scale_features(const Matrix& features, const ScalingParams& params) {
    if (features.cols() != params.features.size())
        throw SchemaError("feature width " + std::to_string(features.cols()) + " does not match scaling params (" +
                          std::to_string(params.features.size()) + ")");
    Matrix out(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r)
        for (std::size_t c = 0; c < features.cols(); ++c) out(r, c) = params.features[c].scale(features(r, c));
    return out;
}

Matrix scale_targets(const Matrix& targets, const ScalingParams& params) {
    if (targets.cols() != params.targets.size())
        throw SchemaError("target width does not match scaling params");
    Matrix out(targets.rows(), targets.cols());
    for (std::size_t r = 0; r < targets.rows(); ++r)
        for (std::size_t c = 0; c < targets.cols(); ++c) out(r, c) = params.targets[c].scale(targets(r, c));
    return out;
}

Dataset apply_scaling(const Dataset& ds, const ScalingParams& params) {
    if (ds.scaling()) throw ArgumentError("apply_scaling: dataset is already scaled");
    const auto& names = ds.feature_names();
    if (names.size() != params.features.size()) throw SchemaError("apply_scaling: feature column count mismatch");
    for (std::size_t c = 0; c < names.size(); ++c)
        if (names[c] != params.features[c].name)
            throw SchemaError("apply_scaling: feature column '" + names[c] + "' does not match fitted '" +
                              params.features[c].name + "'");
    if (ds.has_targets()) {
        const auto& t = ds.schema().targets;
        if (t.size() != params.targets.size()) throw SchemaError("apply_scaling: target column count mismatch");
        for (std::size_t c = 0; c < t.size(); ++c)
            if (t[c] != params.targets[c].name)
                throw SchemaError("apply_scaling: target column '" + t[c] + "' does not match fitted '" +
                                  params.targets[c].name + "'");
    }
    Dataset out = ds;
    out.features_ = scale_features(ds.features(), params);
    if (ds.has_targets()) out.targets_ = scale_targets(ds.targets(), params);
    out.scaling_ = params;
    return out;
}

std::vector<double> invert_target_scaling(std::span<const double> values, const ScalingParams& params) {
    if (values.size() != params.targets.size())
        throw SchemaError("invert_target_scaling: expected " + std::to_string(params.targets.size()) + " values");
    std::vector<double> out(values.size());
    for (std::size_t c = 0; c < values.size(); ++c) out[c] = params.targets[c].invert(values[c]);
    return out;
}

Matrix invert_target_scaling(const Matrix& values, const ScalingParams& params) {
    if (values.cols() != params.targets.size()) throw SchemaError("invert_target_scaling: width mismatch");
    Matrix out(values.rows(), values.cols());
    for (std::size_t r = 0; r < values.rows(); ++r)
        for (std::size_t c = 0; c < values.cols(); ++c) out(r, c) = params.targets[c].invert(values(r, c));
    return out;
}

}  // namespace formulab
