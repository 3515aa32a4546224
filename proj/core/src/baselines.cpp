#include "formulab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Dense>

#include "formulab/errors.hpp"
#include "formulab/random.hpp"

namespace formulab::baselines {
namespace {

using nlohmann::json;

void check_xy(const Matrix& x, std::span<const double> y, const char* what) {
    if (x.rows() == 0) throw ArgumentError(std::string(what) + ": no training rows");
    if (x.cols() == 0) throw ArgumentError(std::string(what) + ": no feature columns");
    if (y.size() != x.rows()) throw ArgumentError(std::string(what) + ": target length does not match rows");
}

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> m(x.cols(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) m[c] += x(r, c);
    for (auto& v : m) v /= static_cast<double>(x.rows());
    return m;
}

double mean(std::span<const double> y) {
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double predict_linear(const LinearModel& m, std::span<const double> x) {
    double s = m.intercept;
    for (std::size_t c = 0; c < x.size(); ++c) s += m.coefficients[c] * x[c];
    return s;
}

// Solves a small dense system with partial pivoting.
std::vector<double> solve_small(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw ArgumentError("plsr: singular loading system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const double> y, std::size_t max_depth, double feature_fraction, Rng& rng)
        : x_(x), y_(y), max_depth_(max_depth), rng_(rng) {
        const auto p = static_cast<double>(x.cols());
        mtry_ = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(feature_fraction * p)), 1, x.cols());
    }

    RegressionTree build(std::vector<std::size_t> rows) {
        RegressionTree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    int grow(RegressionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double sum = 0.0;
        for (auto r : rows) sum += y_[r];
        tree.nodes[id].value = sum / static_cast<double>(rows.size());
        if (depth >= max_depth_ || rows.size() < 2) return id;

        std::vector<std::size_t> features(x_.cols());
        std::iota(features.begin(), features.end(), std::size_t{0});
        if (mtry_ < features.size()) {
            auto picked = rng_.sample(features.size(), mtry_);
            std::sort(picked.begin(), picked.end());
            features = std::move(picked);
        }

        const double n = static_cast<double>(rows.size());
        const double base = sum * sum / n;
        double best_gain = 1e-12 * std::max(1.0, std::abs(base));
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order(rows);
        for (auto f : features) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double xa = x_(a, f), xb = x_(b, f);
                return xa < xb || (xa == xb && a < b);
            });
            double left = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                left += y_[order[i]];
                const double lo = x_(order[i], f), hi = x_(order[i + 1], f);
                if (lo == hi) continue;
                const double nl = static_cast<double>(i + 1);
                const double right = sum - left;
                const double gain = left * left / nl + right * right / (n - nl) - base;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) mid = lo;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows)
            (x_(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(r);
        tree.nodes[id].feature = best_feature;
        tree.nodes[id].threshold = best_threshold;
        const int l = grow(tree, std::move(left_rows), depth + 1);
        const int r = grow(tree, std::move(right_rows), depth + 1);
        tree.nodes[id].left = l;
        tree.nodes[id].right = r;
        return id;
    }

    const Matrix& x_;
    std::span<const double> y_;
    std::size_t max_depth_;
    std::size_t mtry_ = 1;
    Rng& rng_;
};

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

}  // namespace

std::string to_string(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::mlr: return "mlr";
        case RegressorKind::plsr: return "plsr";
        case RegressorKind::knn: return "knn";
        case RegressorKind::rf: return "rf";
        case RegressorKind::ann1: return "ann1";
    }
    return "?";
}

RegressorKind parse_regressor_kind(std::string_view text) {
    for (auto k : {RegressorKind::mlr, RegressorKind::plsr, RegressorKind::knn, RegressorKind::rf, RegressorKind::ann1})
        if (text == to_string(k)) return k;
    if (text == "ann") return RegressorKind::ann1;
    throw ArgumentError("unknown regressor kind '" + std::string(text) + "'");
}

void RegressorSpec::validate() const {
    ann_train.validate();
    switch (kind) {
        case RegressorKind::mlr: break;
        case RegressorKind::plsr:
            if (pls_components < 1) throw ArgumentError("plsr: n_components must be >= 1");
            break;
        case RegressorKind::knn:
            if (knn_neighbors < 1) throw ArgumentError("knn: k must be >= 1");
            break;
        case RegressorKind::rf:
            if (rf_max_depth < 1) throw ArgumentError("rf: max_depth must be >= 1");
            if (rf_trees < 1) throw ArgumentError("rf: tree count must be >= 1");
            if (!(rf_feature_fraction > 0.0 && rf_feature_fraction <= 1.0))
                throw ArgumentError("rf: feature fraction must be in (0, 1]");
            break;
        case RegressorKind::ann1:
            if (ann_hidden < 1) throw ArgumentError("ann1: hidden width must be >= 1");
            break;
    }
}

RegressorSpec RegressorSpec::defaults(RegressorKind kind, TaskKind task) {
    RegressorSpec s;
    s.kind = kind;
    const bool ofdf = task == TaskKind::ofdf_like;
    s.pls_components = ofdf ? 8 : 10;
    s.ann_hidden = ofdf ? 80 : 60;
    s.rf_max_depth = ofdf ? 3 : 5;
    s.knn_neighbors = ofdf ? 5 : 3;
    s.ann_train = {0.01, 0.8, ofdf ? std::size_t{900} : std::size_t{2600}};
    return s;
}

json to_json(const RegressorSpec& spec) {
    json j = {{"kind", to_string(spec.kind)}, {"seed", spec.seed}};
    switch (spec.kind) {
        case RegressorKind::mlr: break;
        case RegressorKind::plsr: j["n_components"] = spec.pls_components; break;
        case RegressorKind::knn: j["k"] = spec.knn_neighbors; break;
        case RegressorKind::rf:
            j["max_depth"] = spec.rf_max_depth;
            j["n_trees"] = spec.rf_trees;
            j["feature_fraction"] = spec.rf_feature_fraction;
            break;
        case RegressorKind::ann1:
            j["hidden_width"] = spec.ann_hidden;
            j["learning_rate"] = spec.ann_train.learning_rate;
            j["momentum"] = spec.ann_train.momentum;
            j["epochs"] = spec.ann_train.epochs;
            break;
    }
    return j;
}

RegressorSpec regressor_spec_from_json(const json& j) {
    RegressorSpec s;
    s.kind = parse_regressor_kind(j.at("kind").get<std::string>());
    s.seed = j.value("seed", std::uint64_t{0});
    s.pls_components = j.value("n_components", s.pls_components);
    s.knn_neighbors = j.value("k", s.knn_neighbors);
    s.rf_max_depth = j.value("max_depth", s.rf_max_depth);
    s.rf_trees = j.value("n_trees", s.rf_trees);
    s.rf_feature_fraction = j.value("feature_fraction", s.rf_feature_fraction);
    s.ann_hidden = j.value("hidden_width", s.ann_hidden);
    s.ann_train.learning_rate = j.value("learning_rate", s.ann_train.learning_rate);
    s.ann_train.momentum = j.value("momentum", s.ann_train.momentum);
    s.ann_train.epochs = j.value("epochs", s.ann_train.epochs);
    s.validate();
    return s;
}

double RegressionTree::predict(std::span<const double> x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
}

std::size_t RegressionTree::depth() const {
    std::function<std::size_t(int)> walk = [&](int id) -> std::size_t {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        if (n.feature < 0) return 0;
        return 1 + std::max(walk(n.left), walk(n.right));
    };
    return nodes.empty() ? 0 : walk(0);
}

std::size_t TrainedRegressor::input_width() const {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) return m.coefficients.size();
            else if constexpr (std::is_same_v<T, KnnModel>) return m.rows.cols();
            else if constexpr (std::is_same_v<T, Ann1>) return m.params.input_width();
            else return m.n_features;
        },
        model_);
}

std::size_t TrainedRegressor::output_width() const {
    if (const auto* ann = std::get_if<Ann1>(&model_)) return ann->params.output_width();
    return 1;
}

std::vector<double> TrainedRegressor::predict(std::span<const double> x) const {
    const std::size_t width = input_width();
    if (x.size() != width)
        throw ArgumentError("predict: input width " + std::to_string(x.size()) + " != " + std::to_string(width));
    return std::visit(
        [&](const auto& m) -> std::vector<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return {predict_linear(m, x)};
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                std::vector<std::pair<double, std::size_t>> dist(m.rows.rows());
                for (std::size_t r = 0; r < m.rows.rows(); ++r) {
                    auto row = m.rows.row(r);
                    double s = 0.0;
                    for (std::size_t c = 0; c < row.size(); ++c) s += (row[c] - x[c]) * (row[c] - x[c]);
                    dist[r] = {s, r};
                }
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m.k), dist.end());
                double total = 0.0;
                for (std::size_t i = 0; i < m.k; ++i) total += m.targets[dist[i].second];
                return {total / static_cast<double>(m.k)};
            } else if constexpr (std::is_same_v<T, Forest>) {
                double total = 0.0;
                for (const auto& t : m.trees) total += t.predict(x);
                return {total / static_cast<double>(m.trees.size())};
            } else {
                return deepnet::forward(m.params, x);
            }
        },
        model_);
}

Matrix TrainedRegressor::predict(const Matrix& x) const {
    if (const auto* ann = std::get_if<Ann1>(&model_)) return deepnet::forward_batch(ann->params, x);
    Matrix out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, 0) = predict(x.row(r))[0];
    return out;
}

json to_json(const TrainedRegressor& model) {
    json j = {{"kind", to_string(model.kind())}};
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                j["coefficients"] = m.coefficients;
                j["intercept"] = m.intercept;
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                j["k"] = m.k;
                j["rows"] = matrix_json(m.rows);
                j["targets"] = m.targets;
            } else if constexpr (std::is_same_v<T, Forest>) {
                json trees = json::array();
                for (const auto& t : m.trees) {
                    json nodes = json::array();
                    for (const auto& n : t.nodes)
                        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
                    trees.push_back(std::move(nodes));
                }
                j["trees"] = std::move(trees);
                j["n_features"] = m.n_features;
            } else {
                j["network"] = deepnet::to_json(m.params);
            }
        },
        model.model());
    return j;
}

TrainedRegressor regressor_from_json(const json& j) {
    const auto kind = parse_regressor_kind(j.at("kind").get<std::string>());
    switch (kind) {
        case RegressorKind::mlr:
        case RegressorKind::plsr:
            return {kind, LinearModel{j.at("coefficients").get<std::vector<double>>(), j.at("intercept").get<double>()}};
        case RegressorKind::knn: {
            KnnModel m{Matrix::from_rows(j.at("rows").get<std::vector<std::vector<double>>>()),
                       j.at("targets").get<std::vector<double>>(), j.at("k").get<std::size_t>()};
            if (m.k < 1 || m.k > m.targets.size() || m.rows.rows() != m.targets.size())
                throw ArgumentError("knn json: inconsistent model");
            return {kind, std::move(m)};
        }
        case RegressorKind::rf: {
            Forest f;
            f.n_features = j.at("n_features").get<std::size_t>();
            for (const auto& jt : j.at("trees")) {
                RegressionTree t;
                for (const auto& n : jt)
                    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                                       n.at(3).get<int>(), n.at(4).get<double>()});
                f.trees.push_back(std::move(t));
            }
            if (f.trees.empty()) throw ArgumentError("rf json: no trees");
            return {kind, std::move(f)};
        }
        case RegressorKind::ann1:
            return {kind, Ann1{deepnet::params_from_json(j.at("network"))}};
    }
    throw ArgumentError("unreachable regressor kind");
}

TrainedRegressor fit_mlr(const Matrix& x, std::span<const double> y) {
    check_xy(x, y, "fit_mlr");
    const auto xm = column_means(x);
    const double ym = mean(y);
    Eigen::MatrixXd a(x.rows(), x.cols());
    Eigen::VectorXd b(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) a(r, c) = x(r, c) - xm[c];
        b(r) = y[r] - ym;
    }
    const Eigen::VectorXd w = a.completeOrthogonalDecomposition().solve(b);
    LinearModel m;
    m.coefficients.assign(w.data(), w.data() + w.size());
    m.intercept = ym;
    for (std::size_t c = 0; c < xm.size(); ++c) m.intercept -= m.coefficients[c] * xm[c];
    return {RegressorKind::mlr, std::move(m)};
}

TrainedRegressor fit_plsr(const Matrix& x, std::span<const double> y, std::size_t n_components) {
    check_xy(x, y, "fit_plsr");
    const std::size_t n = x.rows(), p = x.cols();
    if (n_components < 1 || n_components > p)
        throw ArgumentError("fit_plsr: n_components = " + std::to_string(n_components) + " must be in [1, " +
                            std::to_string(p) + "]");
    const auto xm = column_means(x);
    const double ym = mean(y);
    Matrix e(n, p);
    std::vector<double> f(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) e(r, c) = x(r, c) - xm[c];
        f[r] = y[r] - ym;
    }

    std::vector<std::vector<double>> weights, loadings;
    std::vector<double> y_loadings;
    double first_norm = 0.0;
    for (std::size_t a = 0; a < n_components; ++a) {
        // w = E' f / |E' f|
        std::vector<double> w(p, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c) w[c] += e(r, c) * f[r];
        double norm = 0.0;
        for (double v : w) norm += v * v;
        norm = std::sqrt(norm);
        if (a == 0) first_norm = norm;
        if (norm == 0.0 || norm <= 1e-13 * first_norm) break;  // residual target already explained
        for (auto& v : w) v /= norm;

        std::vector<double> t(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c) t[r] += e(r, c) * w[c];
        double tt = 0.0, ft = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            tt += t[r] * t[r];
            ft += f[r] * t[r];
        }
        if (tt == 0.0) break;
        std::vector<double> load(p, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < p; ++c) load[c] += e(r, c) * t[r];
        for (auto& v : load) v /= tt;
        const double q = ft / tt;

        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < p; ++c) e(r, c) -= t[r] * load[c];
            f[r] -= q * t[r];
        }
        weights.push_back(std::move(w));
        loadings.push_back(std::move(load));
        y_loadings.push_back(q);
    }

    LinearModel m;
    m.coefficients.assign(p, 0.0);
    const std::size_t k = weights.size();
    if (k > 0) {
        // B = W (P'W)^-1 q
        std::vector<std::vector<double>> pw(k, std::vector<double>(k, 0.0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j2 = 0; j2 < k; ++j2)
                for (std::size_t c = 0; c < p; ++c) pw[i][j2] += loadings[i][c] * weights[j2][c];
        const auto z = solve_small(std::move(pw), y_loadings);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t c = 0; c < p; ++c) m.coefficients[c] += weights[i][c] * z[i];
    }
    m.intercept = ym;
    for (std::size_t c = 0; c < p; ++c) m.intercept -= m.coefficients[c] * xm[c];
    return {RegressorKind::plsr, std::move(m)};
}

TrainedRegressor fit_knn(const Matrix& x, std::span<const double> y, std::size_t k) {
    check_xy(x, y, "fit_knn");
    if (k < 1 || k > x.rows())
        throw ArgumentError("fit_knn: k = " + std::to_string(k) + " must be in [1, " + std::to_string(x.rows()) + "]");
    return {RegressorKind::knn, KnnModel{x, std::vector<double>(y.begin(), y.end()), k}};
}

TrainedRegressor fit_rf(const Matrix& x, std::span<const double> y, std::size_t max_depth, std::size_t n_trees,
                        std::uint64_t seed, double feature_fraction) {
    check_xy(x, y, "fit_rf");
    if (x.rows() < 2) throw ArgumentError("fit_rf: need at least 2 rows");
    if (max_depth < 1) throw ArgumentError("fit_rf: max_depth must be >= 1");
    if (n_trees < 1) throw ArgumentError("fit_rf: n_trees must be >= 1");
    if (!(feature_fraction > 0.0 && feature_fraction <= 1.0))
        throw ArgumentError("fit_rf: feature_fraction must be in (0, 1]");
    Forest forest;
    forest.n_features = x.cols();
    forest.trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(seed, t));
        std::vector<std::size_t> rows(x.rows());
        for (auto& r : rows) r = rng.below(x.rows());
        TreeBuilder builder(x, y, max_depth, feature_fraction, rng);
        forest.trees.push_back(builder.build(std::move(rows)));
    }
    return {RegressorKind::rf, std::move(forest)};
}

deepnet::NetworkSpec ann1_spec(std::size_t input_width, std::size_t hidden_width, std::size_t output_width,
                               std::uint64_t seed) {
    deepnet::NetworkSpec spec{{input_width, hidden_width, output_width}, seed};
    spec.validate();
    return spec;
}

TrainedRegressor fit_ann1(const Matrix& x, const Matrix& y, std::size_t hidden_width,
                          const deepnet::TrainConfig& config, std::uint64_t seed) {
    const auto spec = ann1_spec(x.cols(), hidden_width, y.cols(), seed);
    auto result = deepnet::train(spec, config, x, y);
    return {RegressorKind::ann1, Ann1{std::move(result.params)}};
}

TrainedRegressor fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y) {
    spec.validate();
    switch (spec.kind) {
        case RegressorKind::mlr: return fit_mlr(x, y);
        case RegressorKind::plsr: return fit_plsr(x, y, spec.pls_components);
        case RegressorKind::knn: return fit_knn(x, y, spec.knn_neighbors);
        case RegressorKind::rf:
            return fit_rf(x, y, spec.rf_max_depth, spec.rf_trees, spec.seed, spec.rf_feature_fraction);
        case RegressorKind::ann1: {
            check_xy(x, y, "fit_ann1");
            Matrix ym(y.size(), 1);
            std::copy(y.begin(), y.end(), ym.data().begin());
            return fit_ann1(x, ym, spec.ann_hidden, spec.ann_train, spec.seed);
        }
    }
    throw ArgumentError("unreachable regressor kind");
}

Matrix MultiTargetWrapper::predict(const Matrix& x) const {
    Matrix out(x.rows(), models.size());
    for (std::size_t t = 0; t < models.size(); ++t) {
        const Matrix col = models[t].predict(x);
        for (std::size_t r = 0; r < x.rows(); ++r) out(r, t) = col(r, 0);
    }
    return out;
}

MultiTargetWrapper fit_multi(const RegressorSpec& spec, const Matrix& x, const Matrix& y) {
    if (y.cols() < 1) throw ArgumentError("fit_multi: no target columns");
    if (y.rows() != x.rows()) throw ArgumentError("fit_multi: target rows do not match feature rows");
    MultiTargetWrapper w{spec, {}};
    for (std::size_t t = 0; t < y.cols(); ++t) {
        RegressorSpec per_target = spec;
        per_target.seed = derive_seed(spec.seed, t);
        const auto column = y.column(t);
        w.models.push_back(fit(per_target, x, column));
    }
    return w;
}

json to_json(const MultiTargetWrapper& wrapper) {
    json models = json::array();
    for (const auto& m : wrapper.models) models.push_back(to_json(m));
    return {{"spec", to_json(wrapper.spec)}, {"models", models}};
}

MultiTargetWrapper multi_from_json(const json& j) {
    MultiTargetWrapper w{regressor_spec_from_json(j.at("spec")), {}};
    for (const auto& m : j.at("models")) w.models.push_back(regressor_from_json(m));
    if (w.models.empty()) throw ArgumentError("model json: no per-target models");
    return w;
}

}  // namespace formulab::baselines
