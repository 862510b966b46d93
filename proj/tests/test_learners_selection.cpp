#include <doctest.h>

#include "agrisuit/learners/metrics.hpp"
#include "agrisuit/learners/model_selection.hpp"

#include <random>
#include <set>

using namespace agrisuit;
using namespace agrisuit::learners;

TEST_CASE("r2 and f1: exact hand-computed values") {
    Vector y(4), y_hat(4);
    y << 1, 2, 3, 4;
    y_hat << 1, 2, 3, 5;
    CHECK(r2_score(y, y_hat) == doctest::Approx(0.8).epsilon(1e-12));

    Vector t(4), t_hat(4);
    t << 1, 1, 0, 0;
    t_hat << 1, 0, 0, 0;
    CHECK(f1_score(t, t_hat) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("r2 and f1: perfect predictions score 1") {
    Vector y(3);
    y << 2, 4, 8;
    CHECK(r2_score(y, y) == doctest::Approx(1.0));
    Vector t(3);
    t << 1, 0, 1;
    CHECK(f1_score(t, t) == doctest::Approx(1.0));
}

TEST_CASE("r2: mean prediction scores 0, constant truth is rejected") {
    Vector y(4);
    y << 1, 2, 3, 4;
    Vector mean_pred = Vector::Constant(4, y.mean());
    CHECK(r2_score(y, mean_pred) == doctest::Approx(0.0));
    Vector constant = Vector::Constant(4, 2.0);
    CHECK_THROWS_WITH_AS(r2_score(constant, y),
                         doctest::Contains("ZeroVariance"), EstimationError);
}

TEST_CASE("f1: no positives anywhere is undefined") {
    Vector t = Vector::Zero(4);
    CHECK_THROWS_WITH_AS(f1_score(t, t), doctest::Contains("UndefinedF1"),
                         EstimationError);
}

TEST_CASE("kfold: partition is exhaustive, balanced, and seed-determined") {
    auto folds = kfold_assignments(10, 3, 42);
    REQUIRE(folds.size() == 10);
    std::vector<int> counts(3, 0);
    for (int f : folds) {
        REQUIRE(f >= 0);
        REQUIRE(f < 3);
        counts[static_cast<std::size_t>(f)]++;
    }
    for (int c : counts) CHECK(c >= 3);
    CHECK(folds == kfold_assignments(10, 3, 42));
    CHECK(folds != kfold_assignments(10, 3, 43));
}

TEST_CASE("grid enumeration: declared order, first parameter slowest") {
    ParamGrid grid = {{"a", {1, 2}}, {"b", {10, 20}}};
    auto points = enumerate_grid(grid);
    REQUIRE(points.size() == 4);
    CHECK(points[0] == ParamSet{{"a", 1}, {"b", 10}});
    CHECK(points[1] == ParamSet{{"a", 1}, {"b", 20}});
    CHECK(points[2] == ParamSet{{"a", 2}, {"b", 10}});
    CHECK(points[3] == ParamSet{{"a", 2}, {"b", 20}});
}

namespace {

std::pair<Matrix, Vector> interaction_data(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1, 1);
    Matrix X(n, 3);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = unif(rng);
        // deep interaction: sign structure needs several levels of splits
        y[i] = (X(i, 0) > 0 ? 1.0 : -1.0) * (X(i, 1) > 0 ? 1.0 : -1.0) *
               (X(i, 2) > 0 ? 2.0 : 1.0);
    }
    return {X, y};
}

} // namespace

TEST_CASE("grid search: single point is returned with its score") {
    auto [X, y] = interaction_data(120, 5);
    SearchSpec spec;
    spec.family = ModelFamily::random_forest;
    spec.grid = {{"n_trees", {10}}, {"max_depth", {4}}};
    auto result = grid_search_cv(X, y, spec, 7);
    REQUIRE(result.table.size() == 1);
    CHECK(result.best_params == result.table[0].params);
    CHECK(result.best_score == doctest::Approx(result.table[0].mean_score));
}

TEST_CASE("grid search: deep trees win on a deep interaction target") {
    auto [X, y] = interaction_data(600, 21);
    SearchSpec spec;
    spec.family = ModelFamily::random_forest;
    spec.grid = {{"n_trees", {20}}, {"max_depth", {1, 10}}};
    auto result = grid_search_cv(X, y, spec, 3);
    CHECK(param_or(result.best_params, "max_depth", 0) == 10);
}

TEST_CASE("grid search: exact ties keep the first grid point") {
    auto [X, y] = interaction_data(90, 2);
    SearchSpec spec;
    spec.family = ModelFamily::random_forest;
    // identical model under two labels: n_trees repeated
    spec.grid = {{"n_trees", {15, 15}}, {"max_depth", {6}}};
    auto result = grid_search_cv(X, y, spec, 11);
    REQUIRE(result.table.size() == 2);
    CHECK(result.table[0].mean_score == doctest::Approx(result.table[1].mean_score));
    CHECK(result.best_params == result.table[0].params);
}

TEST_CASE("grid search: f1 scoring drives classifier selection") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(-1, 1);
    const int n = 300;
    Matrix X(n, 2);
    Vector t(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = unif(rng);
        X(i, 1) = unif(rng);
        t[i] = X(i, 0) + 0.3 * X(i, 1) > 0 ? 1.0 : 0.0;
    }
    SearchSpec spec;
    spec.family = ModelFamily::logistic;
    spec.scoring = Scoring::f1;
    spec.grid = {{"l2", {0.01, 0.1, 1.0}}};
    auto result = grid_search_cv(X, t, spec, 13);
    CHECK(result.best_score > 0.9);
}

TEST_CASE("fit_family dispatch covers every family") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(-1, 1);
    const int n = 80;
    Matrix X(n, 2);
    Vector y(n), t(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = unif(rng);
        X(i, 1) = unif(rng);
        y[i] = X(i, 0) + 0.1 * unif(rng);
        t[i] = X(i, 0) > 0 ? 1.0 : 0.0;
    }
    for (auto family : {ModelFamily::random_forest, ModelFamily::gradient_boosting,
                        ModelFamily::lasso}) {
        auto model = fit_family(family, default_search(family).grid.empty()
                                            ? ParamSet{}
                                            : enumerate_grid(default_search(family).grid)[0],
                                X, y, 5);
        Vector pred = predict_model(model, X);
        CHECK(pred.size() == n);
    }
    for (auto family :
         {ModelFamily::logistic, ModelFamily::gradient_boosting_classifier}) {
        auto model = fit_family(
            family, enumerate_grid(default_search(family).grid)[0], X, t, 5);
        Vector proba = predict_model(model, X);
        for (Eigen::Index i = 0; i < proba.size(); ++i) {
            CHECK(proba[i] > 0.0);
            CHECK(proba[i] < 1.0);
        }
    }
}
