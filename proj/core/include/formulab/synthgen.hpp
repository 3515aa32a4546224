#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/data_model.hpp"
#include "formulab/splitting.hpp"

namespace formulab::synthgen {

// Bumped whenever a closed-form target function or generation range changes.
inline constexpr const char* kGeneratorVersion = "synthgen-2";

struct SynthConfig {
    std::size_t n_records = 0;
    std::vector<std::size_t> group_sizes;
    double noise_sd = 3.0;  // seconds (OFDF-like) or percentage points (SRMT-like)
    std::uint64_t seed = 0;
    // Drop the nonlinear and categorical terms so the target is affine in the
    // numeric features.
    bool linearized = false;

    void validate() const;
};

nlohmann::json to_json(const SynthConfig& cfg);

/// Imbalanced group sizes: floor(n_groups / 2) groups of 1-3 records, the rest
/// shared evenly (larger groups first). Throws if the large groups would end up
/// with fewer than 4 records.
std::vector<std::size_t> default_group_sizes(std::size_t n_records, std::size_t n_groups);

SynthConfig ofdf_corpus_config(std::uint64_t seed, double noise_sd = 3.0);  // 131 records / 13 groups
SynthConfig srmt_corpus_config(std::uint64_t seed, double noise_sd = 3.0);  // 145 records / 29 groups

DatasetSchema ofdf_schema();
DatasetSchema srmt_schema();

/// Film records. Disintegration time in seconds, with u(v) the position of v
/// inside its generation range:
///   DT = 8 + 42 u(thickness) (0.6 + 0.4 u(polymer_content)) + 12 u(weight)
///        - 10 u(plasticizer_content) + 15 (1 - u(log_s))^2 + 6 u(molecular_weight)
///        + polymer effect {HPMC 8, PVA 12, PVP -4, pullulan 0} + N(0, noise_sd)
/// clamped to [0, 100]. Ranges for u: thickness 40-200, polymer_content 30-80,
/// weight 20-120, plasticizer_content 0-25, molecular_weight 150-600,
/// log_s -6-0. The linearized variant replaces the thickness, log_s and polymer
/// terms with 30 u(thickness) + 15 (1 - u(log_s)).
Dataset generate_ofdf_like(const SynthConfig& cfg);

/// Matrix tablet records. Release R(t) = 100 (1 - exp(-k t)) at 2/4/6/8 h with
///   k = 0.2 exp(E / 2),
///   E = -1.6 u(hpmc_content) - grade + 0.8 u(log_s) - 0.5 u(hardness)
///       - 0.3 u(diameter) + 0.4 u(drug_content) + filler + process
/// which keeps k within about 0.04-0.41 per hour.
/// grade {K100LV 0, K4M 0.3, K15M 0.5, K100M 0.7}, filler {lactose 0.2, MCC 0,
/// dicalcium_phosphate -0.15, none 0}, process {direct 0, wet -0.1, dry 0.05}.
/// Ranges for u: hpmc_content 10-50, log_s -6-0, hardness 40-150, diameter
/// 6-13, drug_content 5-50. The linearized variant is R(t) = (t / 8)(60 + 20 L),
/// L the numeric part of E (without grade, filler and process).
/// Noise is added per point, then clamping to [0, 100] and a running maximum.
Dataset generate_srmt_like(const SynthConfig& cfg);

Dataset generate(TaskKind task, const SynthConfig& cfg);

/// Independent greedy max-dissimilarity for cross-checking the splitter:
/// full rescans each step, no incremental state. |pool| <= 12.
std::vector<std::size_t> brute_force_max_dissim(const splitting::DistanceTable& dt,
                                                std::span<const std::size_t> initial,
                                                std::span<const std::size_t> pool, std::size_t k);

}  // namespace formulab::synthgen
