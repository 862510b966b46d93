#include "agrisuit/learners/tree.hpp"

#include <algorithm>
#include <numeric>

namespace agrisuit::learners {

namespace {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double children_sse = 0.0;
    int left_count = 0;
};

// Picks `count` distinct feature indices via partial Fisher-Yates; the
// scan order stays ascending so the tie-break rule is unaffected.
std::vector<int> sample_features(int n_features, int count, std::mt19937_64& rng) {
    std::vector<int> pool(static_cast<std::size_t>(n_features));
    std::iota(pool.begin(), pool.end(), 0);
    if (count >= n_features) {
        return pool;
    }
    for (int i = 0; i < count; ++i) {
        std::uniform_int_distribution<int> pick(i, n_features - 1);
        std::swap(pool[static_cast<std::size_t>(i)],
                  pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace

RegressionTree RegressionTree::fit(const Matrix& X, const Vector& y,
                                   const TreeSpec& spec) {
    std::vector<int> indices(static_cast<std::size_t>(X.rows()));
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(0);
    return fit_on(X, y, std::move(indices), spec, rng);
}

RegressionTree RegressionTree::fit_on(const Matrix& X, const Vector& y,
                                      std::vector<int> sample_indices,
                                      const TreeSpec& spec,
                                      std::mt19937_64& rng) {
    if (X.rows() == 0 || sample_indices.empty()) {
        throw DataError("EmptyData", "regression tree needs at least one sample");
    }
    if (y.size() != X.rows()) {
        throw DataError("DimensionMismatch", "X and y row counts differ");
    }
    RegressionTree tree;
    bool subsample = spec.max_features > 0 &&
                     spec.max_features < static_cast<int>(X.cols());
    tree.grow(X, y, sample_indices, 0, static_cast<int>(sample_indices.size()),
              0, spec, subsample ? &rng : nullptr);
    return tree;
}

int RegressionTree::grow(const Matrix& X, const Vector& y,
                         std::vector<int>& indices, int begin, int end,
                         int depth, const TreeSpec& spec,
                         std::mt19937_64* rng) {
    int n = end - begin;
    double sum = 0.0;
    double y_min = y[indices[static_cast<std::size_t>(begin)]];
    double y_max = y_min;
    for (int i = begin; i < end; ++i) {
        double v = y[indices[static_cast<std::size_t>(i)]];
        sum += v;
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
    }
    double mean = sum / n;

    auto make_leaf = [&]() {
        Node leaf;
        leaf.prediction = mean;
        leaf.n_samples = n;
        nodes_.push_back(leaf);
        return static_cast<int>(nodes_.size()) - 1;
    };

    bool depth_exhausted = spec.max_depth >= 0 && depth >= spec.max_depth;
    if (depth_exhausted || n < 2 * spec.min_samples_leaf || y_min == y_max) {
        return make_leaf();
    }

    double parent_sse = 0.0;
    for (int i = begin; i < end; ++i) {
        double d = y[indices[static_cast<std::size_t>(i)]] - mean;
        parent_sse += d * d;
    }

    std::vector<int> features;
    if (rng != nullptr) {
        features = sample_features(static_cast<int>(X.cols()),
                                   spec.max_features, *rng);
    } else {
        features.resize(static_cast<std::size_t>(X.cols()));
        std::iota(features.begin(), features.end(), 0);
    }

    SplitCandidate best;
    best.children_sse = parent_sse;
    std::vector<std::pair<double, double>> sorted(static_cast<std::size_t>(n));
    for (int feature : features) {
        for (int i = begin; i < end; ++i) {
            int idx = indices[static_cast<std::size_t>(i)];
            sorted[static_cast<std::size_t>(i - begin)] = {X(idx, feature), y[idx]};
        }
        std::sort(sorted.begin(), sorted.end());
        if (sorted.front().first == sorted.back().first) {
            continue;
        }
        double left_sum = 0.0, left_sq = 0.0;
        double total_sq = 0.0;
        for (const auto& [v, t] : sorted) {
            total_sq += t * t;
        }
        for (int i = 1; i < n; ++i) {
            double value = sorted[static_cast<std::size_t>(i - 1)].first;
            double target = sorted[static_cast<std::size_t>(i - 1)].second;
            left_sum += target;
            left_sq += target * target;
            if (value == sorted[static_cast<std::size_t>(i)].first) {
                continue;
            }
            if (i < spec.min_samples_leaf || n - i < spec.min_samples_leaf) {
                continue;
            }
            double right_sum = sum - left_sum;
            double left_sse = left_sq - left_sum * left_sum / i;
            double right_sse = (total_sq - left_sq) - right_sum * right_sum / (n - i);
            double children = std::max(0.0, left_sse) + std::max(0.0, right_sse);
            if (children < best.children_sse) {
                best.feature = feature;
                best.threshold =
                    value + 0.5 * (sorted[static_cast<std::size_t>(i)].first - value);
                best.children_sse = children;
                best.left_count = i;
            }
        }
    }

    if (best.feature < 0) {
        return make_leaf();
    }

    auto mid = std::stable_partition(
        indices.begin() + begin, indices.begin() + end,
        [&](int idx) { return X(idx, best.feature) <= best.threshold; });
    int split = static_cast<int>(mid - indices.begin());
    if (split == begin || split == end) {
        // threshold degenerate under floating-point midpoint; refuse split
        return make_leaf();
    }

    int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(node_id)].feature = best.feature;
    nodes_[static_cast<std::size_t>(node_id)].threshold = best.threshold;
    nodes_[static_cast<std::size_t>(node_id)].n_samples = n;
    int left = grow(X, y, indices, begin, split, depth + 1, spec, rng);
    int right = grow(X, y, indices, split, end, depth + 1, spec, rng);
    nodes_[static_cast<std::size_t>(node_id)].left = left;
    nodes_[static_cast<std::size_t>(node_id)].right = right;
    nodes_[static_cast<std::size_t>(node_id)].prediction = mean;
    return node_id;
}

double RegressionTree::predict_row(const Matrix& X, Eigen::Index row) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        node = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].prediction;
}

double RegressionTree::predict_point(const Vector& x) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].prediction;
}

Vector RegressionTree::predict(const Matrix& X) const {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out[i] = predict_row(X, i);
    }
    return out;
}

int RegressionTree::depth() const {
    // nodes are stored pre-order; walk explicitly to get the max depth
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int max_depth = 0;
    while (!stack.empty()) {
        auto [node, d] = stack.back();
        stack.pop_back();
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        if (nd.feature < 0) {
            max_depth = std::max(max_depth, d);
        } else {
            stack.push_back({nd.left, d + 1});
            stack.push_back({nd.right, d + 1});
        }
    }
    return max_depth;
}

int RegressionTree::n_leaves() const {
    int count = 0;
    for (const Node& nd : nodes_) {
        if (nd.feature < 0) {
            ++count;
        }
    }
    return count;
}

} // namespace agrisuit::learners
