#include "agrisuit/learners/linear_models.hpp"

#include "agrisuit/learners/boosting.hpp"

#include <cmath>

namespace agrisuit::learners {

namespace {

double penalized_nll(const Matrix& X, const Vector& t, const Vector& w,
                     double b, double l2) {
    double nll = 0.0;
    Vector z = X * w;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double s = z[i] + b;
        // log(1 + e^s) - t*s, computed stably
        double softplus = s > 0 ? s + std::log1p(std::exp(-s))
                                : std::log1p(std::exp(s));
        nll += softplus - t[i] * s;
    }
    return nll + 0.5 * l2 * w.squaredNorm();
}

} // namespace

LogisticRegressionModel LogisticRegressionModel::fit(const Matrix& X,
                                                     const Vector& t,
                                                     double l2_penalty,
                                                     const LogisticOptions& options) {
    if (X.rows() == 0) {
        throw DataError("EmptyData", "logistic regression needs samples");
    }
    double mean = t.mean();
    if (mean <= 0.0 || mean >= 1.0) {
        throw EstimationError("SingleClass",
                              "logistic regression needs both classes present");
    }
    const Eigen::Index d = X.cols();
    Vector w = Vector::Zero(d);
    double b = 0.0;
    double nll = penalized_nll(X, t, w, b, l2_penalty);

    for (int iter = 0; iter < options.max_iter; ++iter) {
        Vector z = X * w + Vector::Constant(X.rows(), b);
        Vector p(X.rows()), wt(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            p[i] = sigmoid(z[i]);
            wt[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
        }
        Vector diff = p - t;
        Vector grad_w = X.transpose() * diff + l2_penalty * w;
        double grad_b = diff.sum();
        double grad_norm = std::max(grad_w.cwiseAbs().maxCoeff(),
                                    std::abs(grad_b));
        if (grad_norm <= options.tol) {
            LogisticRegressionModel model;
            model.weights_ = std::move(w);
            model.intercept_ = b;
            model.l2_penalty_ = l2_penalty;
            return model;
        }

        // Newton system over [w; b] with the intercept as an extra column
        Matrix H(d + 1, d + 1);
        Matrix Xw = X.array().colwise() * wt.array();
        H.topLeftCorner(d, d) = X.transpose() * Xw;
        H.topLeftCorner(d, d).diagonal().array() += l2_penalty;
        Vector cross = Xw.colwise().sum();
        H.topRightCorner(d, 1) = cross;
        H.bottomLeftCorner(1, d) = cross.transpose();
        H(d, d) = wt.sum();

        Vector grad(d + 1);
        grad.head(d) = grad_w;
        grad[d] = grad_b;
        Vector step = H.ldlt().solve(grad);

        // near the optimum the true decrease falls below double precision,
        // so allow ulp-level increases when accepting a step
        double slack = 1e-12 * (1.0 + std::abs(nll));
        double scale = 1.0;
        for (int halving = 0; halving < 40; ++halving) {
            Vector w_next = w - scale * step.head(d);
            double b_next = b - scale * step[d];
            double nll_next = penalized_nll(X, t, w_next, b_next, l2_penalty);
            if (nll_next <= nll + slack) {
                w = std::move(w_next);
                b = b_next;
                nll = nll_next;
                break;
            }
            scale *= 0.5;
        }
    }
    throw EstimationError("NonConvergence",
                          "logistic regression hit the iteration limit");
}

Vector LogisticRegressionModel::predict_proba(const Matrix& X) const {
    Vector z = X * weights_ + Vector::Constant(X.rows(), intercept_);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = sigmoid(z[i]);
    }
    return z;
}

double LogisticRegressionModel::predict_point(const Vector& x) const {
    return sigmoid(weights_.dot(x) + intercept_);
}

void LogisticRegressionModel::set_parameters(Vector weights, double intercept,
                                             double l2) {
    weights_ = std::move(weights);
    intercept_ = intercept;
    l2_penalty_ = l2;
}

LassoModel LassoModel::fit(const Matrix& X, const Vector& y, double l1_penalty,
                           const LassoOptions& options) {
    if (X.rows() == 0) {
        throw DataError("EmptyData", "lasso needs samples");
    }
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    LassoModel model;
    model.l1_penalty_ = l1_penalty;
    Vector w = Vector::Zero(d);
    double b = y.mean();
    Vector residual = y - Vector::Constant(n, b);
    Vector col_sq(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        col_sq[j] = X.col(j).squaredNorm() / n;
    }

    auto soft = [](double v, double k) {
        if (v > k) return v - k;
        if (v < -k) return v + k;
        return 0.0;
    };

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (col_sq[j] == 0.0) {
                continue;
            }
            double rho = X.col(j).dot(residual) / n + col_sq[j] * w[j];
            double w_new = soft(rho, l1_penalty) / col_sq[j];
            double delta = w_new - w[j];
            if (delta != 0.0) {
                residual -= delta * X.col(j);
                w[j] = w_new;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        double b_shift = residual.mean();
        if (b_shift != 0.0) {
            b += b_shift;
            residual.array() -= b_shift;
        }
        max_change = std::max(max_change, std::abs(b_shift));

        model.weights_ = w;
        model.intercept_ = b;
        model.sweep_objectives_.push_back(model.objective(X, y));
        if (max_change <= options.tol) {
            return model;
        }
    }
    throw EstimationError("NonConvergence", "lasso hit the sweep limit");
}

Vector LassoModel::predict(const Matrix& X) const {
    return X * weights_ + Vector::Constant(X.rows(), intercept_);
}

double LassoModel::predict_point(const Vector& x) const {
    return weights_.dot(x) + intercept_;
}

double LassoModel::objective(const Matrix& X, const Vector& y) const {
    double rss = (y - predict(X)).squaredNorm();
    return rss / (2.0 * X.rows()) + l1_penalty_ * weights_.lpNorm<1>();
}

void LassoModel::set_parameters(Vector weights, double intercept, double l1) {
    weights_ = std::move(weights);
    intercept_ = intercept;
    l1_penalty_ = l1;
}

} // namespace agrisuit::learners
