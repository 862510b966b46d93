#include "agrisuit/learners/random_forest.hpp"

#include <cmath>
#include <numeric>

namespace agrisuit::learners {

int ForestSpec::resolved_max_features(int n_features) const {
    if (max_features > 0) {
        return std::min(max_features, n_features);
    }
    if (max_features_fraction > 0.0 && max_features_fraction < 1.0) {
        return std::max(1, static_cast<int>(
                               std::ceil(max_features_fraction * n_features)));
    }
    return n_features;
}

RandomForestRegressor RandomForestRegressor::fit(const Matrix& X,
                                                 const Vector& y,
                                                 const ForestSpec& spec,
                                                 std::uint64_t seed,
                                                 int threads) {
    if (X.rows() == 0) {
        throw DataError("EmptyData", "random forest needs at least one sample");
    }
    if (spec.n_trees < 1) {
        throw ConfigError("InvalidSpec", "n_trees must be >= 1");
    }
    RandomForestRegressor forest;
    forest.spec_ = spec;
    forest.seed_ = seed;
    forest.trees_.resize(static_cast<std::size_t>(spec.n_trees));

    TreeSpec tree_spec;
    tree_spec.max_depth = spec.max_depth;
    tree_spec.min_samples_leaf = spec.min_samples_leaf;
    tree_spec.max_features = spec.resolved_max_features(static_cast<int>(X.cols()));

    const int n = static_cast<int>(X.rows());
    parallel_for(static_cast<std::size_t>(spec.n_trees), threads, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        std::vector<int> indices(static_cast<std::size_t>(n));
        if (spec.bootstrap) {
            std::uniform_int_distribution<int> pick(0, n - 1);
            for (int i = 0; i < n; ++i) {
                indices[static_cast<std::size_t>(i)] = pick(rng);
            }
        } else {
            std::iota(indices.begin(), indices.end(), 0);
        }
        forest.trees_[t] =
            RegressionTree::fit_on(X, y, std::move(indices), tree_spec, rng);
    });
    return forest;
}

Vector RandomForestRegressor::predict(const Matrix& X) const {
    Vector out = Vector::Zero(X.rows());
    for (const auto& tree : trees_) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out[i] += tree.predict_row(X, i);
        }
    }
    return out / static_cast<double>(trees_.size());
}

double RandomForestRegressor::predict_point(const Vector& x) const {
    double sum = 0.0;
    for (const auto& tree : trees_) {
        sum += tree.predict_point(x);
    }
    return sum / static_cast<double>(trees_.size());
}

} // namespace agrisuit::learners
