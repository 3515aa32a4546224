#include "formulab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "formulab/errors.hpp"
#include "formulab/random.hpp"

namespace formulab::splitting {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> values, const char* what) {
    std::vector<std::size_t> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
        throw ArgumentError(std::string(what) + ": duplicate index");
    return v;
}

std::vector<std::size_t> set_difference(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end()), out;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
    return out;
}

std::vector<std::string> group_labels(const Dataset& ds) {
    std::vector<std::string> g;
    g.reserve(ds.size());
    for (const auto& r : ds.records()) g.push_back(r.group_id);
    return g;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

void check_bounds(std::span<const std::size_t> idx, std::size_t n, const char* what) {
    for (auto i : idx)
        if (i >= n) throw ArgumentError(std::string(what) + ": index " + std::to_string(i) + " out of range");
}

}  // namespace

void SplitAssignment::check_partition(std::size_t n) const {
    std::vector<int> seen(n, 0);
    for (const auto* part : {&train, &validation, &test})
        for (auto i : *part) {
            if (i >= n) throw ArgumentError("split: index out of range");
            if (seen[i]++) throw ArgumentError("split: index " + std::to_string(i) + " assigned twice");
        }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) throw ArgumentError("split: index " + std::to_string(i) + " unassigned");
}

SplitAssignment make_assignment(std::size_t n, std::vector<std::size_t> validation, std::vector<std::size_t> test) {
    SplitAssignment s;
    std::vector<char> held(n, 0);
    for (const auto* part : {&validation, &test})
        for (auto i : *part) {
            if (i >= n) throw ArgumentError("split: index out of range");
            if (held[i]) throw ArgumentError("split: index " + std::to_string(i) + " held out twice");
            held[i] = 1;
        }
    for (std::size_t i = 0; i < n; ++i)
        if (!held[i]) s.train.push_back(i);
    s.validation = std::move(validation);
    s.test = std::move(test);
    return s;
}

nlohmann::json to_json(const SplitAssignment& split, const Dataset& ds) {
    auto ids = [&](const std::vector<std::size_t>& idx) {
        std::vector<std::string> out;
        for (auto i : idx) out.push_back(ds.record(i).record_id);
        return out;
    };
    return {{"validation", ids(split.validation)}, {"test", ids(split.test)}};
}

SplitAssignment split_from_json(const nlohmann::json& j, const Dataset& ds) {
    return manual_split(ds, j.at("validation").get<std::vector<std::string>>(),
                        j.value("test", std::vector<std::string>{}));
}

SplitAssignment load_split(const std::filesystem::path& path, const Dataset& ds) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split file '" + path.string() + "'");
    return split_from_json(nlohmann::json::parse(in), ds);
}

void save_split(const SplitAssignment& split, const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(split, ds).dump(2) << '\n';
}

void MdfisConfig::validate() const {
    if (selection_size < 1) throw ArgumentError("MdfisConfig: selection_size must be >= 1");
    if (n_initial_candidates < 1) throw ArgumentError("MdfisConfig: n_initial_candidates must be >= 1");
    if (initial_set_size < 1) throw ArgumentError("MdfisConfig: initial_set_size must be >= 1");
    if (min_group_size < 1) throw ArgumentError("MdfisConfig: min_group_size must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("MdfisConfig: alpha must be finite and >= 0");
}

DistanceTable DistanceTable::from_points(const Matrix& points) {
    DistanceTable dt;
    dt.n_ = points.rows();
    dt.d_.assign(dt.n_ * dt.n_, 0.0);
    for (std::size_t i = 0; i < dt.n_; ++i) {
        auto a = points.row(i);
        for (std::size_t j = i + 1; j < dt.n_; ++j) {
            auto b = points.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) {
                const double diff = a[c] - b[c];
                s += diff * diff;
            }
            const double d = std::sqrt(s);
            dt.d_[i * dt.n_ + j] = d;
            dt.d_[j * dt.n_ + i] = d;
        }
    }
    return dt;
}

DistanceTable DistanceTable::from_dataset(const Dataset& ds) {
    const Matrix& x = ds.features();
    Matrix scaled(x.rows(), x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        ColumnRange r{"", x(0, c), x(0, c)};
        for (std::size_t i = 0; i < x.rows(); ++i) {
            r.min = std::min(r.min, x(i, c));
            r.max = std::max(r.max, x(i, c));
        }
        for (std::size_t i = 0; i < x.rows(); ++i) scaled(i, c) = r.scale(x(i, c));
    }
    return from_points(scaled);
}

std::vector<SplitAssignment> random_split(std::size_t n_records, double fraction, std::size_t repeats,
                                          std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("random_split: fraction must be in (0, 1)");
    // Small slack so that e.g. 10 * 0.3 floors to 3.
    const auto held = static_cast<std::size_t>(std::floor(static_cast<double>(n_records) * fraction + 1e-9));
    if (held < 1) throw ArgumentError("random_split: fraction leaves no held-out record");
    return random_split_sizes(n_records, held, 0, repeats, seed);
}

std::vector<SplitAssignment> random_split(const Dataset& ds, double fraction, std::size_t repeats,
                                          std::uint64_t seed) {
    return random_split(ds.size(), fraction, repeats, seed);
}

std::vector<SplitAssignment> random_split_sizes(std::size_t n_records, std::size_t n_validation,
                                                std::size_t n_test, std::size_t repeats, std::uint64_t seed) {
    if (n_validation + n_test > n_records)
        throw InsufficientDataError("random split: " + std::to_string(n_validation + n_test) +
                                    " held-out records requested from " + std::to_string(n_records));
    std::vector<SplitAssignment> out;
    out.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        Rng rng(derive_seed(seed, r));
        auto drawn = rng.sample(n_records, n_validation + n_test);
        std::vector<std::size_t> val(drawn.begin(), drawn.begin() + static_cast<std::ptrdiff_t>(n_validation));
        std::vector<std::size_t> test(drawn.begin() + static_cast<std::ptrdiff_t>(n_validation), drawn.end());
        out.push_back(make_assignment(n_records, std::move(val), std::move(test)));
    }
    return out;
}

SplitAssignment manual_split(const Dataset& ds, const std::vector<std::string>& validation_ids,
                             const std::vector<std::string>& test_ids) {
    auto resolve = [&](const std::vector<std::string>& ids) {
        std::vector<std::size_t> out;
        for (const auto& id : ids) {
            auto i = ds.index_of(id);
            if (!i) throw LookupError("unknown record_id '" + id + "'");
            out.push_back(*i);
        }
        return out;
    };
    auto val = resolve(validation_ids);
    auto test = resolve(test_ids);
    std::set<std::size_t> seen;
    for (const auto* part : {&val, &test})
        for (auto i : *part)
            if (!seen.insert(i).second)
                throw ArgumentError("manual_split: record '" + ds.record(i).record_id + "' listed twice");
    return make_assignment(ds.size(), std::move(val), std::move(test));
}

std::vector<std::size_t> max_dissim_select(const DistanceTable& dt, std::span<const std::size_t> initial,
                                           std::span<const std::size_t> pool, std::size_t k) {
    if (initial.empty()) throw ArgumentError("max_dissim_select: initial set must be non-empty");
    check_bounds(initial, dt.size(), "max_dissim_select");
    check_bounds(pool, dt.size(), "max_dissim_select");
    auto candidates = sorted_unique(pool, "max_dissim_select");
    for (auto i : initial)
        if (std::binary_search(candidates.begin(), candidates.end(), i))
            throw ArgumentError("max_dissim_select: pool overlaps the initial set");
    if (k > candidates.size())
        throw ArgumentError("max_dissim_select: k = " + std::to_string(k) + " exceeds pool size " +
                            std::to_string(candidates.size()));

    std::vector<double> nearest(candidates.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < candidates.size(); ++c)
        for (auto s : initial) nearest[c] = std::min(nearest[c], dt(candidates[c], s));

    std::vector<char> taken(candidates.size(), 0);
    std::vector<std::size_t> selection;
    selection.reserve(k);
    while (selection.size() < k) {
        std::size_t best = candidates.size();
        for (std::size_t c = 0; c < candidates.size(); ++c)
            if (!taken[c] && (best == candidates.size() || nearest[c] > nearest[best])) best = c;
        taken[best] = 1;
        const std::size_t picked = candidates[best];
        selection.push_back(picked);
        for (std::size_t c = 0; c < candidates.size(); ++c)
            if (!taken[c]) nearest[c] = std::min(nearest[c], dt(candidates[c], picked));
    }
    return selection;
}

SplitAssignment max_dissim_three_way(const Dataset& ds, const DistanceTable& dt, std::size_t n_validation,
                                     std::size_t n_test, std::size_t initial_set_size, std::uint64_t seed) {
    if (initial_set_size < 1) throw ArgumentError("max_dissim_three_way: initial_set_size must be >= 1");
    const std::size_t n = ds.size();
    if (n < 2 * initial_set_size + n_validation + n_test)
        throw InsufficientDataError("max_dissim_three_way: dataset too small for the requested selections");

    auto run = [&](const std::vector<std::size_t>& universe, std::size_t k, std::uint64_t s) {
        Rng rng(s);
        std::vector<std::size_t> initial;
        for (auto pos : rng.sample(universe.size(), initial_set_size)) initial.push_back(universe[pos]);
        auto pool = set_difference(universe, initial);
        return max_dissim_select(dt, initial, pool, k);
    };
    auto val = run(all_indices(n), n_validation, derive_seed(seed, 0));
    auto remainder = set_difference(all_indices(n), val);
    auto test = n_test > 0 ? run(remainder, n_test, derive_seed(seed, 1)) : std::vector<std::size_t>{};
    return make_assignment(n, std::move(val), std::move(test));
}

std::vector<std::size_t> small_group_filter(const Dataset& ds, std::size_t min_group_size) {
    const auto all = all_indices(ds.size());
    return small_group_filter(ds, all, min_group_size);
}

std::vector<std::size_t> small_group_filter(const Dataset& ds, std::span<const std::size_t> universe,
                                            std::size_t min_group_size) {
    check_bounds(universe, ds.size(), "small_group_filter");
    std::map<std::string, std::size_t> counts;
    for (auto i : universe) ++counts[ds.group_of(i)];
    std::vector<std::size_t> out;
    for (auto i : universe)
        if (counts[ds.group_of(i)] >= min_group_size) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

double initial_set_similarity(const DistanceTable& dt, std::span<const std::size_t> set,
                              std::span<const std::size_t> candidates) {
    double total = 0.0;
    std::size_t count = 0;
    for (auto r : candidates) {
        if (std::find(set.begin(), set.end(), r) != set.end()) continue;
        double nearest = std::numeric_limits<double>::infinity();
        for (auto s : set) nearest = std::min(nearest, dt(r, s));
        total += nearest;
        ++count;
    }
    return count == 0 ? 0.0 : -total / static_cast<double>(count);
}

std::vector<std::size_t> select_initial_set(const DistanceTable& dt, std::span<const std::size_t> candidates,
                                            const MdfisConfig& cfg) {
    cfg.validate();
    check_bounds(candidates, dt.size(), "select_initial_set");
    if (candidates.size() < cfg.initial_set_size)
        throw InsufficientDataError("select_initial_set: " + std::to_string(candidates.size()) +
                                    " candidates, need " + std::to_string(cfg.initial_set_size));
    Rng rng(cfg.seed);
    std::vector<std::size_t> best;
    double best_score = kNegInf;
    std::vector<std::size_t> draw(cfg.initial_set_size);
    for (std::size_t d = 0; d < cfg.n_initial_candidates; ++d) {
        auto positions = rng.sample(candidates.size(), cfg.initial_set_size);
        for (std::size_t i = 0; i < positions.size(); ++i) draw[i] = candidates[positions[i]];
        const double score = initial_set_similarity(dt, draw, candidates);
        if (best.empty() || score > best_score) {
            best = draw;
            best_score = score;
        }
    }
    std::sort(best.begin(), best.end());
    return best;
}

std::vector<std::size_t> mdfis_greedy(const DistanceTable& dt, std::span<const std::string> groups,
                                      std::span<const std::size_t> universe, std::span<const std::size_t> initial,
                                      std::span<const std::size_t> pool, std::size_t k, double alpha) {
    if (groups.size() != dt.size()) throw ArgumentError("mdfis_greedy: group labels do not match distance table");
    if (initial.empty()) throw ArgumentError("mdfis_greedy: initial set must be non-empty");
    if (!(alpha >= 0.0)) throw ArgumentError("mdfis_greedy: alpha must be >= 0");
    check_bounds(universe, dt.size(), "mdfis_greedy");
    check_bounds(initial, dt.size(), "mdfis_greedy");
    auto candidates = sorted_unique(pool, "mdfis_greedy");
    check_bounds(candidates, dt.size(), "mdfis_greedy");
    for (auto i : initial)
        if (std::binary_search(candidates.begin(), candidates.end(), i))
            throw ArgumentError("mdfis_greedy: pool overlaps the initial set");
    if (k > candidates.size())
        throw ArgumentError("mdfis_greedy: k = " + std::to_string(k) + " exceeds pool size " +
                            std::to_string(candidates.size()));

    std::map<std::string, std::vector<std::size_t>> members;
    for (auto i : universe) members[groups[i]].push_back(i);

    std::vector<char> selected(dt.size(), 0);
    std::vector<double> nearest(candidates.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < candidates.size(); ++c)
        for (auto s : initial) nearest[c] = std::min(nearest[c], dt(candidates[c], s));

    auto cost_of = [&](std::size_t c) {
        const std::size_t idx = candidates[c];
        if (alpha == 0.0) return nearest[c];
        double total = 0.0;
        std::size_t count = 0;
        auto it = members.find(groups[idx]);
        if (it != members.end())
            for (auto m : it->second)
                if (m != idx && !selected[m]) {
                    total += dt(idx, m);
                    ++count;
                }
        if (count == 0) return kNegInf;  // last unselected member stays in training
        return mdfis_cost(nearest[c], total / static_cast<double>(count), alpha);
    };

    std::vector<std::size_t> selection;
    selection.reserve(k);
    while (selection.size() < k) {
        std::size_t best = candidates.size();
        double best_cost = kNegInf;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (selected[candidates[c]]) continue;
            const double cost = cost_of(c);
            if (cost == kNegInf) continue;
            if (best == candidates.size() || cost > best_cost) {
                best = c;
                best_cost = cost;
            }
        }
        if (best == candidates.size())
            throw InsufficientDataError("mdfis: only " + std::to_string(selection.size()) +
                                        " selectable candidates, need " + std::to_string(k));
        const std::size_t picked = candidates[best];
        selected[picked] = 1;
        selection.push_back(picked);
        for (std::size_t c = 0; c < candidates.size(); ++c)
            if (!selected[candidates[c]]) nearest[c] = std::min(nearest[c], dt(candidates[c], picked));
    }
    return selection;
}

MdfisSelection mdfis_select_detailed(const Dataset& ds, const DistanceTable& dt, const MdfisConfig& cfg,
                                     std::optional<std::vector<std::size_t>> universe,
                                     std::optional<std::vector<std::size_t>> initial_override) {
    cfg.validate();
    if (dt.size() != ds.size()) throw ArgumentError("mdfis_select: distance table does not match dataset");
    const auto u = universe ? sorted_unique(*universe, "mdfis_select") : all_indices(ds.size());
    const auto candidates = small_group_filter(ds, u, cfg.min_group_size);

    MdfisSelection out;
    if (initial_override) {
        out.initial = *initial_override;
    } else {
        if (candidates.size() < cfg.selection_size + cfg.initial_set_size)
            throw InsufficientDataError("mdfis_select: " + std::to_string(candidates.size()) +
                                        " candidates after the small-group filter, need " +
                                        std::to_string(cfg.selection_size + cfg.initial_set_size));
        out.initial = select_initial_set(dt, candidates, cfg);
    }
    const auto pool = set_difference(candidates, out.initial);
    if (pool.size() < cfg.selection_size)
        throw InsufficientDataError("mdfis_select: pool of " + std::to_string(pool.size()) +
                                    " is smaller than selection_size " + std::to_string(cfg.selection_size));
    const auto groups = group_labels(ds);
    out.selected = mdfis_greedy(dt, groups, u, out.initial, pool, cfg.selection_size, cfg.alpha);
    return out;
}

std::vector<std::size_t> mdfis_select(const Dataset& ds, const DistanceTable& dt, const MdfisConfig& cfg) {
    return mdfis_select_detailed(ds, dt, cfg).selected;
}

SplitAssignment mdfis_three_way(const Dataset& ds, const MdfisConfig& cfg, std::uint64_t seed,
                                std::optional<std::size_t> test_size) {
    return mdfis_three_way(ds, DistanceTable::from_dataset(ds), cfg, seed, test_size);
}

SplitAssignment mdfis_three_way(const Dataset& ds, const DistanceTable& dt, const MdfisConfig& cfg,
                                std::uint64_t seed, std::optional<std::size_t> test_size) {
    MdfisConfig first = cfg;
    first.seed = derive_seed(seed, 0);
    auto val = mdfis_select_detailed(ds, dt, first).selected;

    std::vector<std::size_t> test;
    MdfisConfig second = cfg;
    second.seed = derive_seed(seed, 1);
    second.selection_size = test_size.value_or(cfg.selection_size);
    if (second.selection_size > 0) {
        auto remainder = set_difference(all_indices(ds.size()), val);
        test = mdfis_select_detailed(ds, dt, second, remainder).selected;
    }
    return make_assignment(ds.size(), std::move(val), std::move(test));
}

}  // namespace formulab::splitting
