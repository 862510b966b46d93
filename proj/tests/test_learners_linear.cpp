#include <doctest.h>

#include "agrisuit/learners/boosting.hpp"
#include "agrisuit/learners/linear_models.hpp"
#include "agrisuit/learners/scaler.hpp"

#include <cmath>
#include <random>

using namespace agrisuit;
using namespace agrisuit::learners;

TEST_CASE("logistic: balanced classes with zero-variance features give p=0.5") {
    Matrix X = Matrix::Zero(8, 2);
    Vector t(8);
    t << 0, 1, 0, 1, 0, 1, 0, 1;
    auto model = LogisticRegressionModel::fit(X, t, 0.1);
    CHECK(model.weights().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    Vector p = model.predict_proba(X);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        CHECK(p[i] == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("logistic: separable data converges under an L2 penalty") {
    Matrix X(6, 1);
    X << -3, -2, -1, 1, 2, 3;
    Vector t(6);
    t << 0, 0, 0, 1, 1, 1;
    auto model = LogisticRegressionModel::fit(X, t, 0.5);
    CHECK(std::isfinite(model.weights()[0]));
    CHECK(model.weights()[0] > 0.0);
    Vector p = model.predict_proba(X);
    CHECK(p[0] < 0.5);
    CHECK(p[5] > 0.5);
}

TEST_CASE("logistic: single class input is rejected") {
    Matrix X(4, 1);
    X << 1, 2, 3, 4;
    Vector t = Vector::Zero(4);
    CHECK_THROWS_WITH_AS(LogisticRegressionModel::fit(X, t, 0.1),
                         doctest::Contains("SingleClass"), EstimationError);
}

namespace {

double logistic_nll(const Matrix& X, const Vector& t, double w0, double w1,
                    double b, double l2) {
    double nll = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double s = w0 * X(i, 0) + w1 * X(i, 1) + b;
        double softplus = s > 0 ? s + std::log1p(std::exp(-s))
                                : std::log1p(std::exp(s));
        nll += softplus - t[i] * s;
    }
    return nll + 0.5 * l2 * (w0 * w0 + w1 * w1);
}

} // namespace

TEST_CASE("logistic: recovers weights near a fine-grid likelihood oracle") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 200;
    Matrix X(n, 2);
    Vector t(n);
    // true model: logit = 1.2*x0 - 0.8*x1 + 0.3
    for (int i = 0; i < n; ++i) {
        X(i, 0) = normal(rng);
        X(i, 1) = normal(rng);
        double p = sigmoid(1.2 * X(i, 0) - 0.8 * X(i, 1) + 0.3);
        t[i] = unif(rng) < p ? 1.0 : 0.0;
    }
    const double l2 = 0.01;
    auto model = LogisticRegressionModel::fit(X, t, l2);

    // coarse-to-fine grid search over (w0, w1, b) as an independent oracle
    double best_nll = std::numeric_limits<double>::infinity();
    double best_w0 = 0, best_w1 = 0, best_b = 0;
    double c0 = 0, c1 = 0, cb = 0, span = 3.0;
    for (int refine = 0; refine < 6; ++refine) {
        for (int a = -10; a <= 10; ++a) {
            for (int b2 = -10; b2 <= 10; ++b2) {
                for (int c = -10; c <= 10; ++c) {
                    double w0 = c0 + span * a / 10.0;
                    double w1 = c1 + span * b2 / 10.0;
                    double bias = cb + span * c / 10.0;
                    double nll = logistic_nll(X, t, w0, w1, bias, l2);
                    if (nll < best_nll) {
                        best_nll = nll;
                        best_w0 = w0;
                        best_w1 = w1;
                        best_b = bias;
                    }
                }
            }
        }
        c0 = best_w0;
        c1 = best_w1;
        cb = best_b;
        span *= 0.3;
    }
    CHECK(std::abs(model.weights()[0] - best_w0) < 0.2);
    CHECK(std::abs(model.weights()[1] - best_w1) < 0.2);
    CHECK(std::abs(model.intercept() - best_b) < 0.2);
    // the Newton fit must be at least as good as the grid optimum
    CHECK(logistic_nll(X, t, model.weights()[0], model.weights()[1],
                       model.intercept(), l2) <= best_nll + 1e-6);
}

TEST_CASE("lasso: zero penalty equals ordinary least squares") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 60;
    Matrix X(n, 3);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = normal(rng);
        y[i] = 1.5 * X(i, 0) - 2.0 * X(i, 1) + 0.5 + 0.3 * normal(rng);
    }
    auto model = LassoModel::fit(X, y, 0.0);

    Matrix design(n, 4);
    design.leftCols(3) = X;
    design.col(3) = Vector::Ones(n);
    Vector beta = (design.transpose() * design)
                      .ldlt()
                      .solve(design.transpose() * y);
    for (int j = 0; j < 3; ++j) {
        CHECK(model.weights()[j] == doctest::Approx(beta[j]).epsilon(1e-6));
    }
    CHECK(model.intercept() == doctest::Approx(beta[3]).epsilon(1e-6));
}

TEST_CASE("lasso: penalty at the kill threshold zeroes every weight") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 50;
    Matrix X(n, 3);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = normal(rng);
        y[i] = X(i, 0) + normal(rng);
    }
    Vector centered = y.array() - y.mean();
    double alpha_max = (X.transpose() * centered).cwiseAbs().maxCoeff() / n;
    auto model = LassoModel::fit(X, y, alpha_max * 1.000001);
    CHECK(model.weights().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(model.intercept() == doctest::Approx(y.mean()));
}

TEST_CASE("lasso: matches a projected-subgradient convex oracle") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 80;
    Matrix X(n, 3);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = normal(rng);
        y[i] = 2.0 * X(i, 0) - 1.0 * X(i, 2) + 0.4 * normal(rng);
    }
    const double alpha = 0.1;
    auto model = LassoModel::fit(X, y, alpha);

    // independent subgradient descent on the same objective
    Vector w = Vector::Zero(3);
    double b = 0.0;
    for (int it = 0; it < 400000; ++it) {
        double step = 0.05 / std::sqrt(1.0 + it / 100.0);
        Vector r = y - X * w - Vector::Constant(n, b);
        Vector grad = -(X.transpose() * r) / n;
        for (int j = 0; j < 3; ++j) {
            double sub = grad[j] + alpha * (w[j] > 0 ? 1.0 : (w[j] < 0 ? -1.0 : 0.0));
            w[j] -= step * sub;
            // snap tiny weights so the subgradient can settle at exactly 0
            if (std::abs(w[j]) < step * alpha) w[j] = 0.0;
        }
        b -= step * (-r.mean());
    }
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(model.weights()[j] - w[j]) < 1e-4);
    }
    CHECK(std::abs(model.intercept() - b) < 1e-4);
}

TEST_CASE("lasso: objective is non-increasing across sweeps") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 40;
    Matrix X(n, 4);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) X(i, j) = normal(rng);
        y[i] = X(i, 1) - X(i, 3) + 0.2 * normal(rng);
    }
    auto model = LassoModel::fit(X, y, 0.05);
    const auto& trace = model.sweep_objectives();
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1] + 1e-12);
    }
}

TEST_CASE("max-abs scaler: round trip and unit range") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-5, 5);
    Matrix X(30, 4);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 3; ++j) X(i, j) = unif(rng);
    X.col(3).setZero(); // all-zero feature passes through
    auto scaler = MaxAbsScaler::fit(X);
    Matrix scaled = scaler.transform(X);
    CHECK(scaled.cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
    CHECK(scaled.col(3).cwiseAbs().maxCoeff() == 0.0);
    Matrix back = scaler.inverse_transform(scaled);
    CHECK((back - X).cwiseAbs().maxCoeff() <= 1e-12);
}
