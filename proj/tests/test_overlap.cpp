#include <doctest.h>

#include "agrisuit/learners/boosting.hpp"
#include "agrisuit/overlap.hpp"
#include "agrisuit/synthetic.hpp"

using namespace agrisuit;
using namespace agrisuit::overlap;

TEST_CASE("trim_overlap: paper thresholds, strict on both sides") {
    Vector scores(4);
    scores << 0.1, 0.3, 0.5, 0.85;
    auto report = trim_overlap(scores, 0.2, 0.8);
    CHECK(report.kept_indices == std::vector<std::size_t>{1, 2});
    CHECK_FALSE(report.entries[0].kept);
    CHECK(report.entries[1].kept);

    Vector edge(3);
    edge << 0.2, 0.5, 0.8; // exactly 0.2 / 0.8 are excluded
    auto edge_report = trim_overlap(edge, 0.2, 0.8);
    CHECK(edge_report.kept_indices == std::vector<std::size_t>{1});
}

TEST_CASE("trim_overlap: all-mid scores keep everything, empty result errors") {
    Vector mid = Vector::Constant(5, 0.5);
    CHECK(trim_overlap(mid, 0.2, 0.8).kept_indices.size() == 5);

    Vector extreme(2);
    extreme << 0.05, 0.95;
    CHECK_THROWS_WITH_AS(trim_overlap(extreme, 0.2, 0.8),
                         doctest::Contains("EmptyResult"), DataError);
}

TEST_CASE("trim_overlap: widening the band never drops a kept unit") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector scores(200);
    for (int i = 0; i < 200; ++i) {
        scores[i] = unif(rng);
    }
    auto narrow = trim_overlap(scores, 0.3, 0.7);
    auto wide = trim_overlap(scores, 0.2, 0.8);
    for (std::size_t idx : narrow.kept_indices) {
        CHECK(std::find(wide.kept_indices.begin(), wide.kept_indices.end(), idx) !=
              wide.kept_indices.end());
    }
}

TEST_CASE("estimate_propensity: randomized treatment scores near 0.5") {
    synthetic::SyntheticSpec spec;
    spec.n = 2000;
    spec.d = 4;
    spec.confounding_strength = 0.0; // fair coin
    spec.theta.kind = synthetic::ThetaKind::constant;
    spec.theta.constant_value = 1.0;
    spec.seed = 21;
    auto data = synthetic::generate_plm(spec);
    Matrix X = data.table.features();
    Vector t = data.table.treatments();
    Vector scores = estimate_propensity(X, t, 3, 5);
    double mean = scores.mean();
    CHECK(mean >= 0.45);
    CHECK(mean <= 0.55);
    // scores never escape (0,1) after clipping
    CHECK(scores.minCoeff() > 0.0);
    CHECK(scores.maxCoeff() < 1.0);
}

TEST_CASE("estimate_propensity: deterministic assignment pushes scores extreme") {
    synthetic::SyntheticSpec spec;
    spec.n = 1000;
    spec.d = 4;
    spec.theta.kind = synthetic::ThetaKind::constant;
    spec.theta.constant_value = 1.0;
    spec.deterministic_assignment_feature = 0; // T = 1{x0 > 0}
    spec.seed = 33;
    auto data = synthetic::generate_plm(spec);
    Matrix X = data.table.features();
    Vector t = data.table.treatments();
    Vector scores = estimate_propensity(X, t, 3, 5);
    // count directly: trim_overlap throws EmptyResult if nothing survives
    long trimmed = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (scores[i] <= 0.2 || scores[i] >= 0.8) {
            ++trimmed;
        }
    }
    CHECK(static_cast<double>(trimmed) / spec.n >= 0.9);
}

TEST_CASE("estimate_propensity: scores are a deterministic function of inputs") {
    synthetic::SyntheticSpec spec;
    spec.n = 400;
    spec.d = 3;
    spec.theta.kind = synthetic::ThetaKind::constant;
    spec.seed = 8;
    auto data = synthetic::generate_plm(spec);
    Matrix X = data.table.features();
    Vector t = data.table.treatments();
    Vector first = estimate_propensity(X, t, 3, 42, 1);
    Vector second = estimate_propensity(X, t, 3, 42, 2);
    CHECK((first - second).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propensity is a function of features only") {
    // two units with identical X and opposite T get the same model score
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-1, 1);
    const int n = 200;
    Matrix X(n, 2);
    Vector t(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = unif(rng);
        X(i, 1) = unif(rng);
        t[i] = unif(rng) > 0 ? 1.0 : 0.0;
    }
    X.row(1) = X.row(0);
    t[0] = 1.0;
    t[1] = 0.0;
    learners::BoostSpec spec;
    spec.loss = learners::BoostLoss::logistic;
    spec.n_stages = 50;
    auto model = learners::GradientBoostingModel::fit(X, t, spec);
    Vector proba = model.predict(X);
    CHECK(proba[0] == doctest::Approx(proba[1]).epsilon(1e-15));
}
