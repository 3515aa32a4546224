#include "formulab/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "formulab/errors.hpp"
#include "formulab/random.hpp"

namespace formulab::synthgen {
namespace {

struct Range {
    double lo;
    double hi;
    double unit(double v) const { return (v - lo) / (hi - lo); }
};

// Generation ranges of the nine descriptors (canonical order).
constexpr Range kDescriptorRanges[9] = {
    {150.0, 600.0}, {-1.0, 5.0}, {0.0, 5.0},    {1.0, 10.0},  {0.0, 12.0},
    {20.0, 140.0},  {10.0, 45.0}, {100.0, 900.0}, {-6.0, 0.0}};

std::array<double, 9> draw_descriptors(Rng& rng) {
    std::array<double, 9> d{};
    for (std::size_t k = 0; k < 9; ++k) {
        const auto& r = kDescriptorRanges[k];
        if (DescriptorSet::is_count(k))
            d[k] = static_cast<double>(static_cast<std::int64_t>(r.lo) +
                                       static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(r.hi - r.lo) + 1)));
        else
            d[k] = std::round(rng.uniform(r.lo, r.hi) * 100.0) / 100.0;
    }
    return d;
}

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&labels)[N]) {
    return labels[rng.below(N)];
}

double round_to(double v, double step) {
    const double inv = std::round(1.0 / step);
    return std::round(v * inv) / inv;
}

std::string record_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%03zu", prefix, i + 1);
    return buf;
}

std::string group_id(std::size_t g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "API-%02zu", g + 1);
    return buf;
}

void add_descriptors(DatasetSchema& s) {
    for (auto name : DescriptorSet::names) s.features.push_back({std::string(name), ColumnKind::numeric});
}

void put_descriptors(FormulationRecord& r, const std::array<double, 9>& d) {
    for (std::size_t k = 0; k < 9; ++k) r.numerics[std::string(DescriptorSet::names[k])] = d[k];
}

constexpr Range kThickness{40.0, 200.0}, kPolymer{30.0, 80.0}, kWeight{20.0, 120.0}, kPlasticizer{0.0, 25.0};
constexpr Range kHpmc{10.0, 50.0}, kHardness{40.0, 150.0}, kDiameter{6.0, 13.0}, kDrug{5.0, 50.0};

}  // namespace

void SynthConfig::validate() const {
    if (n_records == 0) throw ArgumentError("SynthConfig: n_records must be positive");
    if (group_sizes.empty()) throw ArgumentError("SynthConfig: group_sizes is empty");
    if (std::any_of(group_sizes.begin(), group_sizes.end(), [](auto g) { return g == 0; }))
        throw ArgumentError("SynthConfig: every group needs at least one record");
    const auto total = std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
    if (total != n_records)
        throw ArgumentError("SynthConfig: group sizes sum to " + std::to_string(total) + ", expected " +
                            std::to_string(n_records));
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ArgumentError("SynthConfig: noise_sd must be >= 0");
}

nlohmann::json to_json(const SynthConfig& cfg) {
    return {{"generator", kGeneratorVersion}, {"n_records", cfg.n_records}, {"group_sizes", cfg.group_sizes},
            {"noise_sd", cfg.noise_sd},       {"seed", cfg.seed},           {"linearized", cfg.linearized}};
}

std::vector<std::size_t> default_group_sizes(std::size_t n_records, std::size_t n_groups) {
    if (n_groups == 0 || n_groups > n_records) throw ArgumentError("group count must be in [1, n_records]");
    static constexpr std::size_t kSmall[] = {2, 3, 1, 3, 2};
    const std::size_t n_small = n_groups / 2;
    std::vector<std::size_t> small;
    std::size_t small_total = 0;
    for (std::size_t i = 0; i < n_small; ++i) {
        small.push_back(kSmall[i % std::size(kSmall)]);
        small_total += small.back();
    }
    const std::size_t n_large = n_groups - n_small;
    if (small_total >= n_records || (n_records - small_total) / n_large < 4)
        throw ArgumentError("default_group_sizes: " + std::to_string(n_records) + " records are too few for " +
                            std::to_string(n_groups) + " groups");
    const std::size_t rest = n_records - small_total;
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < n_large; ++i) sizes.push_back(rest / n_large + (i < rest % n_large ? 1 : 0));
    sizes.insert(sizes.end(), small.begin(), small.end());
    return sizes;
}

SynthConfig ofdf_corpus_config(std::uint64_t seed, double noise_sd) {
    return {131, default_group_sizes(131, 13), noise_sd, seed, false};
}

SynthConfig srmt_corpus_config(std::uint64_t seed, double noise_sd) {
    return {145, default_group_sizes(145, 29), noise_sd, seed, false};
}

DatasetSchema ofdf_schema() {
    DatasetSchema s;
    s.group_column = "api";
    s.task_kind = TaskKind::ofdf_like;
    add_descriptors(s);
    s.features.push_back({"polymer_type", ColumnKind::categorical});
    s.features.push_back({"plasticizer_type", ColumnKind::categorical});
    for (const char* name : {"polymer_content", "plasticizer_content", "drug_content", "weight", "thickness",
                             "tensile_strength", "elongation", "folding_endurance"})
        s.features.push_back({name, ColumnKind::numeric});
    s.targets = {"disintegration_time"};
    return s;
}

DatasetSchema srmt_schema() {
    DatasetSchema s;
    s.group_column = "api";
    s.task_kind = TaskKind::srmt_like;
    add_descriptors(s);
    s.features.push_back({"hpmc_grade", ColumnKind::categorical});
    s.features.push_back({"filler_type", ColumnKind::categorical});
    s.features.push_back({"granulation_process", ColumnKind::categorical});
    for (const char* name : {"drug_content", "hpmc_content", "filler_content", "diameter", "hardness"})
        s.features.push_back({name, ColumnKind::numeric});
    s.targets = {"release_2h", "release_4h", "release_6h", "release_8h"};
    return s;
}

Dataset generate_ofdf_like(const SynthConfig& cfg) {
    cfg.validate();
    static constexpr const char* kPolymers[] = {"HPMC", "PVA", "PVP", "pullulan"};
    static constexpr const char* kPlasticizers[] = {"", "PEG400", "glycerol", "propylene_glycol"};
    Rng rng(cfg.seed);
    std::vector<FormulationRecord> records;
    for (std::size_t g = 0; g < cfg.group_sizes.size(); ++g) {
        const auto descriptors = draw_descriptors(rng);
        const double base_drug = rng.uniform(5.0, 30.0);
        for (std::size_t m = 0; m < cfg.group_sizes[g]; ++m) {
            FormulationRecord r;
            r.record_id = record_id("OFDF", records.size());
            r.group_id = group_id(g);
            put_descriptors(r, descriptors);
            const std::string polymer = pick(rng, kPolymers);
            const std::string plasticizer = pick(rng, kPlasticizers);
            const double polymer_content = round_to(rng.uniform(kPolymer.lo, kPolymer.hi), 0.1);
            const double plasticizer_content =
                plasticizer.empty() ? 0.0 : round_to(rng.uniform(2.0, kPlasticizer.hi), 0.1);
            const double drug_content = round_to(std::clamp(base_drug + rng.uniform(-5.0, 5.0), 1.0, 40.0), 0.1);
            const double weight = round_to(rng.uniform(kWeight.lo, kWeight.hi), 0.1);
            const double thickness = round_to(rng.uniform(kThickness.lo, kThickness.hi), 1.0);
            const double tensile = round_to(2.0 + 0.3 * polymer_content - 0.4 * plasticizer_content +
                                                rng.uniform(-2.0, 2.0), 0.01);
            const double elongation = round_to(5.0 + 2.5 * plasticizer_content + rng.uniform(0.0, 10.0), 0.1);
            const double folding = std::round(60.0 + 6.0 * plasticizer_content + rng.uniform(0.0, 80.0));

            r.categoricals["polymer_type"] = polymer;
            r.categoricals["plasticizer_type"] = plasticizer;
            r.numerics["polymer_content"] = polymer_content;
            r.numerics["plasticizer_content"] = plasticizer_content;
            r.numerics["drug_content"] = drug_content;
            r.numerics["weight"] = weight;
            r.numerics["thickness"] = thickness;
            r.numerics["tensile_strength"] = std::max(tensile, 0.5);
            r.numerics["elongation"] = elongation;
            r.numerics["folding_endurance"] = folding;

            const double u_mw = kDescriptorRanges[0].unit(descriptors[0]);
            const double u_logs = kDescriptorRanges[8].unit(descriptors[8]);
            double dt = 8.0 + 12.0 * kWeight.unit(weight) - 10.0 * kPlasticizer.unit(plasticizer_content) +
                        6.0 * u_mw;
            if (cfg.linearized) {
                dt += 30.0 * kThickness.unit(thickness) + 15.0 * (1.0 - u_logs);
            } else {
                const double polymer_effect =
                    polymer == "HPMC" ? 8.0 : polymer == "PVA" ? 12.0 : polymer == "PVP" ? -4.0 : 0.0;
                dt += 42.0 * kThickness.unit(thickness) * (0.6 + 0.4 * kPolymer.unit(polymer_content)) +
                      15.0 * (1.0 - u_logs) * (1.0 - u_logs) + polymer_effect;
            }
            // Draw unconditionally so noise_sd does not change the feature stream.
            const double z = rng.normal();
            dt += cfg.noise_sd * z;
            r.targets = {std::clamp(dt, 0.0, 100.0)};
            records.push_back(std::move(r));
        }
    }
    return Dataset::build(ofdf_schema(), std::move(records));
}

Dataset generate_srmt_like(const SynthConfig& cfg) {
    cfg.validate();
    static constexpr const char* kGrades[] = {"K100LV", "K4M", "K15M", "K100M"};
    static constexpr const char* kFillers[] = {"", "MCC", "dicalcium_phosphate", "lactose"};
    static constexpr const char* kProcesses[] = {"direct_compression", "dry_granulation", "wet_granulation"};
    static constexpr double kTimes[] = {2.0, 4.0, 6.0, 8.0};
    Rng rng(cfg.seed);
    std::vector<FormulationRecord> records;
    for (std::size_t g = 0; g < cfg.group_sizes.size(); ++g) {
        const auto descriptors = draw_descriptors(rng);
        const double base_drug = rng.uniform(10.0, 40.0);
        for (std::size_t m = 0; m < cfg.group_sizes[g]; ++m) {
            FormulationRecord r;
            r.record_id = record_id("SRMT", records.size());
            r.group_id = group_id(g);
            put_descriptors(r, descriptors);
            const std::string grade = pick(rng, kGrades);
            const std::string filler = pick(rng, kFillers);
            const std::string process = pick(rng, kProcesses);
            const double drug = round_to(std::clamp(base_drug + rng.uniform(-8.0, 8.0), kDrug.lo, kDrug.hi), 0.1);
            const double hpmc = round_to(rng.uniform(kHpmc.lo, kHpmc.hi), 0.1);
            const double filler_content = filler.empty() ? 0.0 : round_to(rng.uniform(5.0, 50.0), 0.1);
            const double diameter = round_to(rng.uniform(kDiameter.lo, kDiameter.hi), 0.1);
            const double hardness = round_to(rng.uniform(kHardness.lo, kHardness.hi), 1.0);

            r.categoricals["hpmc_grade"] = grade;
            r.categoricals["filler_type"] = filler;
            r.categoricals["granulation_process"] = process;
            r.numerics["drug_content"] = drug;
            r.numerics["hpmc_content"] = hpmc;
            r.numerics["filler_content"] = filler_content;
            r.numerics["diameter"] = diameter;
            r.numerics["hardness"] = hardness;

            const double u_logs = kDescriptorRanges[8].unit(descriptors[8]);
            const double lin = -1.6 * kHpmc.unit(hpmc) + 0.8 * u_logs - 0.5 * kHardness.unit(hardness) -
                               0.3 * kDiameter.unit(diameter) + 0.4 * kDrug.unit(drug);
            std::array<double, 4> z{};
            for (auto& v : z) v = rng.normal();

            std::vector<double> profile(4);
            if (cfg.linearized) {
                // Affine stand-in: (t / 8) * (60 + 20 * lin), lin in [-2.4, 1.2].
                for (std::size_t t = 0; t < 4; ++t) profile[t] = kTimes[t] / 8.0 * (60.0 + 20.0 * lin);
            } else {
                const double grade_effect =
                    grade == "K4M" ? 0.3 : grade == "K15M" ? 0.5 : grade == "K100M" ? 0.7 : 0.0;
                const double filler_effect =
                    filler == "lactose" ? 0.2 : filler == "dicalcium_phosphate" ? -0.15 : 0.0;
                const double process_effect =
                    process == "wet_granulation" ? -0.1 : process == "dry_granulation" ? 0.05 : 0.0;
                const double k = 0.2 * std::exp(0.5 * (lin - grade_effect + filler_effect + process_effect));
                for (std::size_t t = 0; t < 4; ++t) profile[t] = 100.0 * (1.0 - std::exp(-k * kTimes[t]));
            }
            double running = 0.0;
            for (std::size_t t = 0; t < 4; ++t) {
                const double v = std::clamp(profile[t] + cfg.noise_sd * z[t], 0.0, 100.0);
                running = std::max(running, v);
                profile[t] = running;
            }
            r.targets = std::move(profile);
            records.push_back(std::move(r));
        }
    }
    return Dataset::build(srmt_schema(), std::move(records));
}

Dataset generate(TaskKind task, const SynthConfig& cfg) {
    return task == TaskKind::ofdf_like ? generate_ofdf_like(cfg) : generate_srmt_like(cfg);
}

std::vector<std::size_t> brute_force_max_dissim(const splitting::DistanceTable& dt,
                                                std::span<const std::size_t> initial,
                                                std::span<const std::size_t> pool, std::size_t k) {
    if (pool.size() > 12) throw ArgumentError("brute_force_max_dissim: pool larger than 12");
    if (initial.empty()) throw ArgumentError("brute_force_max_dissim: initial set must be non-empty");
    if (k > pool.size()) throw ArgumentError("brute_force_max_dissim: k exceeds pool size");

    std::vector<std::size_t> reference(initial.begin(), initial.end());
    std::vector<std::size_t> chosen;
    for (std::size_t step = 0; step < k; ++step) {
        bool have = false;
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t candidate : pool) {
            if (std::find(chosen.begin(), chosen.end(), candidate) != chosen.end()) continue;
            double score = dt(candidate, reference[0]);
            for (std::size_t r : reference) score = std::min(score, dt(candidate, r));
            if (!have || score > best_score || (score == best_score && candidate < best)) {
                have = true;
                best = candidate;
                best_score = score;
            }
        }
        chosen.push_back(best);
        reference.push_back(best);
    }
    return chosen;
}

}  // namespace formulab::synthgen
