#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "formulab/data_model.hpp"
#include "formulab/matrix.hpp"

namespace formulab::splitting {

/// Disjoint train / validation / test row indices. Validation and test keep
/// selection order; train is ascending.
struct SplitAssignment {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;

    // Throws ArgumentError unless the three sets partition [0, n).
    void check_partition(std::size_t n) const;

    friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

// Train is derived as the complement of validation and test.
SplitAssignment make_assignment(std::size_t n, std::vector<std::size_t> validation, std::vector<std::size_t> test);

// {"validation":[record ids], "test":[record ids]}
nlohmann::json to_json(const SplitAssignment& split, const Dataset& ds);
SplitAssignment split_from_json(const nlohmann::json& j, const Dataset& ds);
SplitAssignment load_split(const std::filesystem::path& path, const Dataset& ds);
void save_split(const SplitAssignment& split, const Dataset& ds, const std::filesystem::path& path);

struct MdfisConfig {
    std::size_t selection_size = 20;
    double alpha = 0.5;
    std::size_t min_group_size = 4;
    std::size_t n_initial_candidates = 10000;
    std::size_t initial_set_size = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Symmetric Euclidean distance matrix between feature rows.
class DistanceTable {
public:
    static DistanceTable from_points(const Matrix& points);
    // Min-max scales the encoded features over all rows, then from_points.
    // Targets never enter the distance.
    static DistanceTable from_dataset(const Dataset& ds);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

std::vector<SplitAssignment> random_split(std::size_t n_records, double fraction, std::size_t repeats,
                                          std::uint64_t seed);
std::vector<SplitAssignment> random_split(const Dataset& ds, double fraction, std::size_t repeats,
                                          std::uint64_t seed);
// Fixed-count variant: validation and test of the requested sizes per repeat.
std::vector<SplitAssignment> random_split_sizes(std::size_t n_records, std::size_t n_validation,
                                                std::size_t n_test, std::size_t repeats, std::uint64_t seed);

SplitAssignment manual_split(const Dataset& ds, const std::vector<std::string>& validation_ids,
                             const std::vector<std::string>& test_ids);

/// Greedy maximum dissimilarity: repeatedly moves the pool element whose
/// minimum distance to (initial + already selected) is largest. Ties go to the
/// lowest index.
std::vector<std::size_t> max_dissim_select(const DistanceTable& dt, std::span<const std::size_t> initial,
                                           std::span<const std::size_t> pool, std::size_t k);

// Original algorithm for a three-way split: a random initial set of
// `initial_set_size`, validation from the rest, then test from the remainder.
SplitAssignment max_dissim_three_way(const Dataset& ds, const DistanceTable& dt, std::size_t n_validation,
                                     std::size_t n_test, std::size_t initial_set_size, std::uint64_t seed);

// Indices (ascending) whose group has at least `min_group_size` members.
std::vector<std::size_t> small_group_filter(const Dataset& ds, std::size_t min_group_size);
std::vector<std::size_t> small_group_filter(const Dataset& ds, std::span<const std::size_t> universe,
                                            std::size_t min_group_size);

// Coverage score of a candidate initial set: minus the mean, over the
// remaining candidates, of the distance to the nearest set member.
double initial_set_similarity(const DistanceTable& dt, std::span<const std::size_t> set,
                              std::span<const std::size_t> candidates);

std::vector<std::size_t> select_initial_set(const DistanceTable& dt, std::span<const std::size_t> candidates,
                                            const MdfisConfig& cfg);

constexpr double mdfis_cost(double original_distance, double sub_mean_distance, double alpha) {
    return original_distance - alpha * sub_mean_distance;
}

/// Step 3 of MD-FIS. `universe` is the set of records still available (its
/// group members count as unselected); `pool` are the selectable candidates.
/// With alpha > 0 a candidate that is the last unselected member of its group
/// has cost -inf and is never taken.
std::vector<std::size_t> mdfis_greedy(const DistanceTable& dt, std::span<const std::string> groups,
                                      std::span<const std::size_t> universe, std::span<const std::size_t> initial,
                                      std::span<const std::size_t> pool, std::size_t k, double alpha);

struct MdfisSelection {
    std::vector<std::size_t> initial;
    std::vector<std::size_t> selected;
};

/// Filter small groups, pick a representative initial set (unless one is
/// given), then greedily select cfg.selection_size records. `universe`
/// defaults to every record.
MdfisSelection mdfis_select_detailed(const Dataset& ds, const DistanceTable& dt, const MdfisConfig& cfg,
                                     std::optional<std::vector<std::size_t>> universe = std::nullopt,
                                     std::optional<std::vector<std::size_t>> initial_override = std::nullopt);

std::vector<std::size_t> mdfis_select(const Dataset& ds, const DistanceTable& dt, const MdfisConfig& cfg);

/// MD-FIS twice: validation over all records, then test over the remainder.
/// `test_size` defaults to cfg.selection_size.
SplitAssignment mdfis_three_way(const Dataset& ds, const MdfisConfig& cfg, std::uint64_t seed,
                                std::optional<std::size_t> test_size = std::nullopt);
SplitAssignment mdfis_three_way(const Dataset& ds, const DistanceTable& dt, const MdfisConfig& cfg,
                                std::uint64_t seed, std::optional<std::size_t> test_size = std::nullopt);

}  // namespace formulab::splitting
