#include "agrisuit/learners/model_selection.hpp"

#include "agrisuit/learners/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace agrisuit::learners {

std::string family_name(ModelFamily family) {
    switch (family) {
    case ModelFamily::random_forest: return "random_forest";
    case ModelFamily::gradient_boosting: return "gradient_boosting";
    case ModelFamily::gradient_boosting_classifier:
        return "gradient_boosting_classifier";
    case ModelFamily::logistic: return "logistic";
    case ModelFamily::lasso: return "lasso";
    }
    return "unknown";
}

ModelFamily family_from_name(const std::string& name) {
    if (name == "random_forest") return ModelFamily::random_forest;
    if (name == "gradient_boosting") return ModelFamily::gradient_boosting;
    if (name == "gradient_boosting_classifier")
        return ModelFamily::gradient_boosting_classifier;
    if (name == "logistic") return ModelFamily::logistic;
    if (name == "lasso") return ModelFamily::lasso;
    throw ConfigError("InvalidSpec", "unknown model family: " + name);
}

double param_or(const ParamSet& params, const std::string& name,
                double fallback) {
    for (const auto& [key, value] : params) {
        if (key == name) {
            return value;
        }
    }
    return fallback;
}

SearchSpec default_search(ModelFamily family) {
    SearchSpec spec;
    spec.family = family;
    switch (family) {
    case ModelFamily::random_forest:
        spec.grid = {{"n_trees", {100}},
                     {"max_depth", {-1, 10, 20}},
                     {"min_samples_leaf", {1, 5, 20}}};
        spec.scoring = Scoring::r2;
        break;
    case ModelFamily::gradient_boosting:
    case ModelFamily::gradient_boosting_classifier:
        spec.grid = {{"n_stages", {100, 300}},
                     {"learning_rate", {0.05, 0.1}},
                     {"max_depth", {3}}};
        spec.scoring = family == ModelFamily::gradient_boosting ? Scoring::r2
                                                                : Scoring::f1;
        break;
    case ModelFamily::logistic:
        spec.grid = {{"l2", {0.01, 0.1, 1.0}}};
        spec.scoring = Scoring::f1;
        break;
    case ModelFamily::lasso:
        spec.grid = {{"l1", {1e-4, 1e-3, 1e-2, 1e-1, 1.0}}};
        spec.scoring = Scoring::r2;
        break;
    }
    return spec;
}

std::vector<int> kfold_assignments(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) {
        throw ConfigError("InvalidSpec", "k_folds must be >= 2");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> folds(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        folds[order[rank]] = static_cast<int>(rank % static_cast<std::size_t>(k));
    }
    return folds;
}

std::vector<ParamSet> enumerate_grid(const ParamGrid& grid) {
    if (grid.empty()) {
        throw ConfigError("InvalidSpec", "hyperparameter grid is empty");
    }
    std::vector<ParamSet> points{{}};
    for (const auto& [name, values] : grid) {
        if (values.empty()) {
            throw ConfigError("InvalidSpec", "empty value list for " + name);
        }
        std::vector<ParamSet> expanded;
        expanded.reserve(points.size() * values.size());
        for (const auto& base : points) {
            for (double value : values) {
                ParamSet next = base;
                next.emplace_back(name, value);
                expanded.push_back(std::move(next));
            }
        }
        points = std::move(expanded);
    }
    return points;
}

FittedModel fit_family(ModelFamily family, const ParamSet& params,
                       const Matrix& X, const Vector& y, std::uint64_t seed,
                       int threads) {
    switch (family) {
    case ModelFamily::random_forest: {
        ForestSpec spec;
        spec.n_trees = static_cast<int>(param_or(params, "n_trees", 100));
        spec.max_depth = static_cast<int>(param_or(params, "max_depth", -1));
        spec.min_samples_leaf =
            static_cast<int>(param_or(params, "min_samples_leaf", 1));
        spec.max_features = static_cast<int>(param_or(params, "max_features", -1));
        spec.max_features_fraction =
            param_or(params, "max_features_fraction", 1.0);
        spec.bootstrap = param_or(params, "bootstrap", 1.0) != 0.0;
        return RandomForestRegressor::fit(X, y, spec, seed, threads);
    }
    case ModelFamily::gradient_boosting:
    case ModelFamily::gradient_boosting_classifier: {
        BoostSpec spec;
        spec.n_stages = static_cast<int>(param_or(params, "n_stages", 100));
        spec.learning_rate = param_or(params, "learning_rate", 0.1);
        spec.max_depth = static_cast<int>(param_or(params, "max_depth", 3));
        spec.min_samples_leaf =
            static_cast<int>(param_or(params, "min_samples_leaf", 1));
        spec.loss = family == ModelFamily::gradient_boosting
                        ? BoostLoss::squared
                        : BoostLoss::logistic;
        return GradientBoostingModel::fit(X, y, spec);
    }
    case ModelFamily::logistic:
        return LogisticRegressionModel::fit(X, y, param_or(params, "l2", 1.0));
    case ModelFamily::lasso:
        return LassoModel::fit(X, y, param_or(params, "l1", 1e-3));
    }
    throw ConfigError("InvalidSpec", "unhandled model family");
}

Vector predict_model(const FittedModel& model, const Matrix& X) {
    return std::visit(
        [&](const auto& m) -> Vector {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LogisticRegressionModel>) {
                return m.predict_proba(X);
            } else {
                return m.predict(X);
            }
        },
        model);
}

namespace {

double score_predictions(Scoring scoring, const Vector& truth,
                         const Vector& predicted) {
    if (scoring == Scoring::r2) {
        return r2_score(truth, predicted);
    }
    Vector labels = predicted.unaryExpr(
        [](double p) { return p > 0.5 ? 1.0 : 0.0; });
    return f1_score(truth, labels);
}

} // namespace

GridSearchResult grid_search_cv(const Matrix& X, const Vector& y,
                                const SearchSpec& spec, std::uint64_t seed,
                                int threads) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    auto points = enumerate_grid(spec.grid);
    auto folds = kfold_assignments(n, spec.k_folds, seed);

    // Pre-split fold views so each (point, fold) task only fits + scores.
    struct FoldView {
        Matrix X_train, X_valid;
        Vector y_train, y_valid;
    };
    std::vector<FoldView> views(static_cast<std::size_t>(spec.k_folds));
    for (int f = 0; f < spec.k_folds; ++f) {
        std::vector<Eigen::Index> train_rows, valid_rows;
        for (std::size_t i = 0; i < n; ++i) {
            (folds[i] == f ? valid_rows : train_rows)
                .push_back(static_cast<Eigen::Index>(i));
        }
        auto& view = views[static_cast<std::size_t>(f)];
        view.X_train = X(train_rows, Eigen::all);
        view.X_valid = X(valid_rows, Eigen::all);
        view.y_train = y(train_rows);
        view.y_valid = y(valid_rows);
    }

    GridSearchResult result;
    result.table.resize(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        result.table[p].params = points[p];
        result.table[p].fold_scores.assign(
            static_cast<std::size_t>(spec.k_folds), 0.0);
    }

    std::size_t n_tasks = points.size() * static_cast<std::size_t>(spec.k_folds);
    std::vector<std::exception_ptr> failures(n_tasks);
    parallel_for(n_tasks, threads, [&](std::size_t task) {
        std::size_t p = task / static_cast<std::size_t>(spec.k_folds);
        std::size_t f = task % static_cast<std::size_t>(spec.k_folds);
        const auto& view = views[f];
        try {
            // seed depends on the fold alone, so identical grid points score
            // identically and ties are exact
            FittedModel model = fit_family(spec.family, points[p], view.X_train,
                                           view.y_train, derive_seed(seed, f),
                                           /*threads=*/1);
            Vector predicted = predict_model(model, view.X_valid);
            result.table[p].fold_scores[f] =
                score_predictions(spec.scoring, view.y_valid, predicted);
        } catch (const Error&) {
            // a degenerate fold (e.g. single-class validation split) scores
            // as the worst possible value instead of aborting the search
            result.table[p].fold_scores[f] =
                -std::numeric_limits<double>::infinity();
            failures[task] = std::current_exception();
        }
    });

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_index = points.size();
    for (std::size_t p = 0; p < points.size(); ++p) {
        auto& entry = result.table[p];
        entry.mean_score =
            std::accumulate(entry.fold_scores.begin(), entry.fold_scores.end(),
                            0.0) /
            static_cast<double>(spec.k_folds);
        if (entry.mean_score > best) {
            best = entry.mean_score;
            best_index = p;
        }
    }
    if (best_index == points.size() || !std::isfinite(best)) {
        for (const auto& failure : failures) {
            if (failure) {
                std::rethrow_exception(failure);
            }
        }
        throw EstimationError("DegenerateSearch", "no grid point could be scored");
    }
    result.best_params = points[best_index];
    result.best_score = best;
    return result;
}

} // namespace agrisuit::learners
