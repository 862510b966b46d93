#ifndef AGRISUIT_LEARNERS_LINEAR_MODELS_HPP
#define AGRISUIT_LEARNERS_LINEAR_MODELS_HPP

#include "agrisuit/common.hpp"

namespace agrisuit::learners {

struct LogisticOptions {
    double tol = 1e-8;
    int max_iter = 200;
};

struct LassoOptions {
    double tol = 1e-10;
    int max_sweeps = 100000;
};

// L2-penalized logistic regression, fit by damped Newton iterations until
// the penalized-likelihood gradient has inf-norm <= tol. The intercept is
// not penalized.
class LogisticRegressionModel {
public:
    static LogisticRegressionModel fit(const Matrix& X, const Vector& t,
                                       double l2_penalty,
                                       const LogisticOptions& options = LogisticOptions());

    Vector predict_proba(const Matrix& X) const;
    double predict_point(const Vector& x) const;

    const Vector& weights() const noexcept { return weights_; }
    double intercept() const noexcept { return intercept_; }
    double l2_penalty() const noexcept { return l2_penalty_; }
    void set_parameters(Vector weights, double intercept, double l2);

private:
    Vector weights_;
    double intercept_ = 0.0;
    double l2_penalty_ = 0.0;
};

// Lasso fit by cyclic coordinate descent with soft-thresholding on the
// objective (1/2n)||y - b - Xw||^2 + l1 * ||w||_1. Converged when the
// largest coefficient change in a sweep is <= tol.
class LassoModel {
public:
    static LassoModel fit(const Matrix& X, const Vector& y, double l1_penalty,
                          const LassoOptions& options = LassoOptions());

    Vector predict(const Matrix& X) const;
    double predict_point(const Vector& x) const;

    double objective(const Matrix& X, const Vector& y) const;

    const Vector& weights() const noexcept { return weights_; }
    double intercept() const noexcept { return intercept_; }
    double l1_penalty() const noexcept { return l1_penalty_; }
    // objective value after each sweep, for convergence diagnostics
    const std::vector<double>& sweep_objectives() const noexcept {
        return sweep_objectives_;
    }
    void set_parameters(Vector weights, double intercept, double l1);

private:
    Vector weights_;
    double intercept_ = 0.0;
    double l1_penalty_ = 0.0;
    std::vector<double> sweep_objectives_;
};

} // namespace agrisuit::learners

#endif
