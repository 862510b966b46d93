#ifndef AGRISUIT_LEARNERS_TREE_HPP
#define AGRISUIT_LEARNERS_TREE_HPP

#include "agrisuit/common.hpp"

#include <random>
#include <span>

namespace agrisuit::learners {

struct TreeSpec {
    int max_depth = -1;         // -1 = unlimited
    int min_samples_leaf = 1;
    int max_features = -1;      // features scanned per split; -1 = all
};

// Greedy CART with variance-reduction splitting. Thresholds are midpoints
// between consecutive sorted unique feature values; ties in impurity
// reduction resolve to the lowest feature index, then lowest threshold.
class RegressionTree {
public:
    struct Node {
        int feature = -1;       // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double prediction = 0.0;
        int n_samples = 0;
    };

    static RegressionTree fit(const Matrix& X, const Vector& y,
                              const TreeSpec& spec);

    // Forest building block: fit on a row subset (duplicates allowed for
    // bootstrap) with per-split feature subsampling driven by `rng`.
    static RegressionTree fit_on(const Matrix& X, const Vector& y,
                                 std::vector<int> sample_indices,
                                 const TreeSpec& spec, std::mt19937_64& rng);

    double predict_row(const Matrix& X, Eigen::Index row) const;
    double predict_point(const Vector& x) const;
    Vector predict(const Matrix& X) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::vector<Node>& mutable_nodes() noexcept { return nodes_; }
    int depth() const;
    int n_leaves() const;

private:
    int grow(const Matrix& X, const Vector& y, std::vector<int>& indices,
             int begin, int end, int depth, const TreeSpec& spec,
             std::mt19937_64* rng);

    std::vector<Node> nodes_;
};

} // namespace agrisuit::learners

#endif
