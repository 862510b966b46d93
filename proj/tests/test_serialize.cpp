#include <doctest.h>

#include "agrisuit/io/serialize.hpp"
#include "agrisuit/synthetic.hpp"
#include "test_util.hpp"

#include <random>

using namespace agrisuit;

namespace {

std::pair<Matrix, Vector> regression_data(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix X(n, 3);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) {
            X(i, j) = normal(rng);
        }
        y[i] = std::sin(X(i, 0)) + 0.5 * X(i, 1) + 0.1 * normal(rng);
    }
    return {X, y};
}

} // namespace

TEST_CASE("random forest JSON round trip predicts bit-identically") {
    auto [X, y] = regression_data(300, 3);
    learners::ForestSpec spec;
    spec.n_trees = 15;
    spec.max_depth = 6;
    auto forest = learners::RandomForestRegressor::fit(X, y, spec, 7);
    auto restored = io::forest_from_json(io::to_json(forest));
    CHECK((forest.predict(X) - restored.predict(X)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient boosting JSON round trip predicts bit-identically") {
    auto [X, y] = regression_data(200, 5);
    learners::BoostSpec spec;
    spec.n_stages = 20;
    auto model = learners::GradientBoostingModel::fit(X, y, spec);
    auto restored = io::boosting_from_json(io::to_json(model));
    CHECK((model.predict(X) - restored.predict(X)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("logistic and lasso JSON round trips are exact") {
    auto [X, y] = regression_data(200, 7);
    Vector t = y.unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; });
    auto logistic = learners::LogisticRegressionModel::fit(X, t, 0.1);
    auto logistic_restored = io::logistic_from_json(io::to_json(logistic));
    CHECK((logistic.predict_proba(X) - logistic_restored.predict_proba(X))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    auto lasso = learners::LassoModel::fit(X, y, 0.01);
    auto lasso_restored = io::lasso_from_json(io::to_json(lasso));
    CHECK((lasso.predict(X) - lasso_restored.predict(X)).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("cate model JSON round trip, both kinds") {
    synthetic::SyntheticSpec spec;
    spec.n = 600;
    spec.d = 3;
    spec.theta.kind = synthetic::ThetaKind::constant;
    spec.theta.constant_value = 2.0;
    spec.seed = 13;
    auto data = synthetic::generate_plm(spec);
    Matrix X = data.table.features();
    Vector y = data.table.outcomes();
    Vector t = data.table.treatments();

    dml::NuisanceSpec nuisance;
    nuisance.outcome_model.family = learners::ModelFamily::random_forest;
    nuisance.outcome_model.grid = {{"n_trees", {20}}, {"max_depth", {8}},
                                   {"min_samples_leaf", {5}}};
    nuisance.treatment_model.family = learners::ModelFamily::logistic;
    nuisance.treatment_model.grid = {{"l2", {0.1}}};

    test_util::TempDir dir;

    SUBCASE("linear kind") {
        dml::DmlOptions options;
        options.final_stage = dml::CateKind::linear;
        options.threads = 2;
        auto model = dml::fit_dml(X, y, t, data.table.feature_names, nuisance,
                                  options, 17);
        auto path = dir.file("model.json");
        io::save_cate_model(path, model);
        auto restored = io::load_cate_model(path);
        CHECK(restored.kind == dml::CateKind::linear);
        CHECK(restored.ate == model.ate);
        CHECK(restored.ate_ci_low == model.ate_ci_low);
        CHECK(restored.feature_names == model.feature_names);
        CHECK((restored.predict(X) - model.predict(X)).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK(restored.first_stage.outcome_params == model.first_stage.outcome_params);
    }

    SUBCASE("causal forest kind") {
        dml::DmlOptions options;
        options.final_stage = dml::CateKind::causal_forest;
        options.threads = 2;
        auto forest_spec = std::make_shared<causal::CausalForestSpec>();
        forest_spec->n_trees = 25;
        options.forest_spec = forest_spec;
        auto model = dml::fit_dml(X, y, t, data.table.feature_names, nuisance,
                                  options, 19);
        auto path = dir.file("model.json");
        io::save_cate_model(path, model);
        auto restored = io::load_cate_model(path);
        REQUIRE(restored.forest != nullptr);
        CHECK((restored.predict(X) - model.predict(X)).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK(restored.seed == model.seed);
    }
}

TEST_CASE("interpretation tree JSON carries structure and leaf stats") {
    Matrix X(20, 2);
    Vector cates(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = i;
        X(i, 1) = -i;
        cates[i] = i < 10 ? 0.0 : 4.0;
    }
    auto itree = causal::interpret_tree(X, cates, 2, {"tmax", "precip"});
    auto j = io::to_json(itree);
    CHECK(j["format"] == "agrisuit.interpretation_tree");
    CHECK(j["max_depth"] == 2);
    REQUIRE(j["nodes"].size() == itree.tree.nodes().size());
    CHECK(j["nodes"][0].contains("feature_name"));
    bool found_leaf = false;
    for (const auto& node : j["nodes"]) {
        if (node["feature"].get<int>() < 0) {
            found_leaf = true;
            CHECK(node.contains("n"));
            CHECK(node.contains("cate_mean"));
            CHECK(node.contains("ci95"));
        }
    }
    CHECK(found_leaf);
}

TEST_CASE("model loaders reject mislabeled documents") {
    auto j = nlohmann::json{{"format", "something_else"}};
    CHECK_THROWS_AS(io::cate_model_from_json(j), DataError);
    CHECK_THROWS_AS(io::forest_from_json(j), DataError);
}
