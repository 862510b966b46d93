#ifndef AGRISUIT_LEARNERS_RANDOM_FOREST_HPP
#define AGRISUIT_LEARNERS_RANDOM_FOREST_HPP

#include "agrisuit/learners/tree.hpp"

namespace agrisuit::learners {

struct ForestSpec {
    int n_trees = 100;
    int max_depth = -1;
    int min_samples_leaf = 1;
    // features tried per split: explicit count wins, else fraction of d,
    // else all features
    int max_features = -1;
    double max_features_fraction = 1.0;
    bool bootstrap = true;

    int resolved_max_features(int n_features) const;
};

// Bagged CART ensemble; prediction is the arithmetic mean over trees.
// Per-tree seeds are derived from (seed, tree index), so fits are
// deterministic for any thread count.
class RandomForestRegressor {
public:
    static RandomForestRegressor fit(const Matrix& X, const Vector& y,
                                     const ForestSpec& spec,
                                     std::uint64_t seed, int threads = 1);

    Vector predict(const Matrix& X) const;
    double predict_point(const Vector& x) const;

    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    std::vector<RegressionTree>& mutable_trees() noexcept { return trees_; }
    const ForestSpec& spec() const noexcept { return spec_; }
    ForestSpec& mutable_spec() noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

private:
    std::vector<RegressionTree> trees_;
    ForestSpec spec_;
    std::uint64_t seed_ = 0;
};

} // namespace agrisuit::learners

#endif
