#include "agrisuit/learners/boosting.hpp"

#include <cmath>

namespace agrisuit::learners {

GradientBoostingModel GradientBoostingModel::fit(const Matrix& X,
                                                 const Vector& y,
                                                 const BoostSpec& spec) {
    if (X.rows() == 0) {
        throw DataError("EmptyData", "gradient boosting needs at least one sample");
    }
    if (spec.n_stages < 1) {
        throw ConfigError("InvalidSpec", "n_stages must be >= 1");
    }
    GradientBoostingModel model;
    model.spec_ = spec;
    if (spec.loss == BoostLoss::squared) {
        model.init_value_ = y.mean();
    } else {
        double p = std::clamp(y.mean(), 1e-12, 1.0 - 1e-12);
        model.init_value_ = std::log(p / (1.0 - p));
    }

    TreeSpec tree_spec;
    tree_spec.max_depth = spec.max_depth;
    tree_spec.min_samples_leaf = spec.min_samples_leaf;

    Vector score = Vector::Constant(X.rows(), model.init_value_);
    Vector gradient(X.rows());
    model.stages_.reserve(static_cast<std::size_t>(spec.n_stages));
    for (int stage = 0; stage < spec.n_stages; ++stage) {
        if (spec.loss == BoostLoss::squared) {
            gradient = y - score;
        } else {
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                gradient[i] = y[i] - sigmoid(score[i]);
            }
        }
        RegressionTree tree = RegressionTree::fit(X, gradient, tree_spec);
        score += spec.learning_rate * tree.predict(X);
        model.stages_.push_back(std::move(tree));
    }
    return model;
}

Vector GradientBoostingModel::predict_raw(const Matrix& X, int stages) const {
    std::size_t upto = stages < 0 ? stages_.size()
                                  : std::min<std::size_t>(
                                        static_cast<std::size_t>(stages),
                                        stages_.size());
    Vector score = Vector::Constant(X.rows(), init_value_);
    for (std::size_t s = 0; s < upto; ++s) {
        score += spec_.learning_rate * stages_[s].predict(X);
    }
    return score;
}

Vector GradientBoostingModel::predict(const Matrix& X, int stages) const {
    Vector raw = predict_raw(X, stages);
    if (spec_.loss == BoostLoss::logistic) {
        for (Eigen::Index i = 0; i < raw.size(); ++i) {
            raw[i] = sigmoid(raw[i]);
        }
    }
    return raw;
}

double GradientBoostingModel::predict_point(const Vector& x) const {
    double score = init_value_;
    for (const auto& tree : stages_) {
        score += spec_.learning_rate * tree.predict_point(x);
    }
    return spec_.loss == BoostLoss::logistic ? sigmoid(score) : score;
}

} // namespace agrisuit::learners
