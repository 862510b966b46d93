#include "agrisuit/causal_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace agrisuit::causal {

int CausalForestSpec::resolved_max_features(int n_features) const {
    if (max_features > 0) {
        return std::min(max_features, n_features);
    }
    if (max_features_fraction > 0.0 && max_features_fraction < 1.0) {
        return std::max(1, static_cast<int>(
                               std::ceil(max_features_fraction * n_features)));
    }
    return n_features;
}

double CausalTree::predict_row(const Matrix& X, Eigen::Index row) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes[static_cast<std::size_t>(node)];
        node = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].tau;
}

double CausalTree::predict_point(const Vector& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes[static_cast<std::size_t>(node)];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].tau;
}

namespace {

struct HalfStats {
    double sum_ty = 0.0; // Σ T̃Ỹ
    double sum_tt = 0.0; // Σ T̃²
    int n = 0;
};

HalfStats stats_of(const Vector& y_resid, const Vector& t_resid,
                   const std::vector<int>& rows) {
    HalfStats s;
    for (int r : rows) {
        s.sum_ty += t_resid[r] * y_resid[r];
        s.sum_tt += t_resid[r] * t_resid[r];
        s.n += 1;
    }
    return s;
}

struct Entry {
    double value;
    double ty;
    double tt;
    bool structure;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const Vector& y_resid, const Vector& t_resid,
                const CausalForestSpec& spec, int max_features,
                std::mt19937_64& rng)
        : X_(X), y_(y_resid), t_(t_resid), spec_(spec),
          max_features_(max_features), rng_(rng) {}

    int grow(CausalTree& tree, std::vector<int>& structure,
             std::vector<int>& estimation, int depth) {
        HalfStats s = stats_of(y_, t_, structure);
        HalfStats e = stats_of(y_, t_, estimation);
        if (e.sum_tt < spec_.min_residual_ssq) {
            throw EstimationError("DegenerateResiduals",
                                  "estimation half has no treatment variation");
        }

        auto make_leaf = [&]() {
            CausalTree::Node leaf;
            leaf.tau = e.sum_ty / e.sum_tt;
            leaf.n_estimation = e.n;
            tree.nodes.push_back(leaf);
            tree.leaf_estimation_rows.push_back(estimation);
            return static_cast<int>(tree.nodes.size()) - 1;
        };

        bool depth_exhausted = spec_.max_depth >= 0 && depth >= spec_.max_depth;
        if (depth_exhausted || s.n < 2 * spec_.min_samples_leaf ||
            e.n < 2 * spec_.min_samples_leaf || s.sum_tt < spec_.min_residual_ssq) {
            return make_leaf();
        }

        double tau_parent = s.sum_ty / s.sum_tt;
        double parent_score = s.n * tau_parent * tau_parent;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = parent_score;
        std::vector<Entry> entries;
        entries.reserve(structure.size() + estimation.size());
        for (int feature : candidate_features()) {
            entries.clear();
            for (int r : structure) {
                entries.push_back({X_(r, feature), t_[r] * y_[r], t_[r] * t_[r], true});
            }
            for (int r : estimation) {
                entries.push_back({X_(r, feature), t_[r] * y_[r], t_[r] * t_[r], false});
            }
            std::sort(entries.begin(), entries.end(),
                      [](const Entry& a, const Entry& b) { return a.value < b.value; });
            if (entries.front().value == entries.back().value) {
                continue;
            }
            HalfStats ls, le;
            for (std::size_t i = 1; i < entries.size(); ++i) {
                const Entry& prev = entries[i - 1];
                if (prev.structure) {
                    ls.sum_ty += prev.ty;
                    ls.sum_tt += prev.tt;
                    ls.n += 1;
                } else {
                    le.sum_ty += prev.ty;
                    le.sum_tt += prev.tt;
                    le.n += 1;
                }
                if (prev.value == entries[i].value) {
                    continue;
                }
                // validity on both honesty halves
                if (ls.n < spec_.min_samples_leaf ||
                    s.n - ls.n < spec_.min_samples_leaf ||
                    le.n < spec_.min_samples_leaf ||
                    e.n - le.n < spec_.min_samples_leaf) {
                    continue;
                }
                double rs_tt = s.sum_tt - ls.sum_tt;
                double re_tt = e.sum_tt - le.sum_tt;
                if (ls.sum_tt < spec_.min_residual_ssq ||
                    rs_tt < spec_.min_residual_ssq ||
                    le.sum_tt < spec_.min_residual_ssq ||
                    re_tt < spec_.min_residual_ssq) {
                    continue;
                }
                double tau_left = ls.sum_ty / ls.sum_tt;
                double tau_right = (s.sum_ty - ls.sum_ty) / rs_tt;
                double score = ls.n * tau_left * tau_left +
                               (s.n - ls.n) * tau_right * tau_right;
                if (score > best_score) {
                    best_score = score;
                    best_feature = feature;
                    best_threshold =
                        prev.value + 0.5 * (entries[i].value - prev.value);
                }
            }
        }

        if (best_feature < 0) {
            return make_leaf();
        }

        std::vector<int> s_left, s_right, e_left, e_right;
        for (int r : structure) {
            (X_(r, best_feature) <= best_threshold ? s_left : s_right).push_back(r);
        }
        for (int r : estimation) {
            (X_(r, best_feature) <= best_threshold ? e_left : e_right).push_back(r);
        }
        if (s_left.empty() || s_right.empty() || e_left.empty() || e_right.empty()) {
            return make_leaf();
        }

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.leaf_estimation_rows.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        int left = grow(tree, s_left, e_left, depth + 1);
        int right = grow(tree, s_right, e_right, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = left;
        tree.nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

private:
    std::vector<int> candidate_features() {
        int d = static_cast<int>(X_.cols());
        std::vector<int> features(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
        if (max_features_ >= d) {
            return features;
        }
        for (int i = 0; i < max_features_; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(features[static_cast<std::size_t>(i)],
                      features[static_cast<std::size_t>(pick(rng_))]);
        }
        features.resize(static_cast<std::size_t>(max_features_));
        std::sort(features.begin(), features.end());
        return features;
    }

    const Matrix& X_;
    const Vector& y_;
    const Vector& t_;
    const CausalForestSpec& spec_;
    int max_features_;
    std::mt19937_64& rng_;
};

} // namespace

CausalForest CausalForest::fit(const Matrix& X, const Vector& y_resid,
                               const Vector& t_resid,
                               const CausalForestSpec& spec, std::uint64_t seed,
                               int threads) {
    const int n = static_cast<int>(X.rows());
    if (n < 4 * spec.min_samples_leaf) {
        throw DataError("EmptyData",
                        "causal forest needs at least 4*min_samples_leaf samples");
    }
    double t_var = (t_resid.array() - t_resid.mean()).square().sum() /
                   static_cast<double>(n);
    if (t_var < 1e-12) {
        throw EstimationError("DegenerateResiduals",
                              "treatment residual variance below 1e-12");
    }
    if (spec.n_trees < 1 || spec.subsample_fraction <= 0.0 ||
        spec.subsample_fraction > 1.0) {
        throw ConfigError("InvalidSpec", "bad causal forest spec");
    }

    CausalForest forest;
    forest.spec_ = spec;
    forest.seed_ = seed;
    forest.trees_.resize(static_cast<std::size_t>(spec.n_trees));
    int max_features = spec.resolved_max_features(static_cast<int>(X.cols()));
    int subsample = std::max(4 * spec.min_samples_leaf,
                             static_cast<int>(spec.subsample_fraction * n));
    subsample = std::min(subsample, n);

    parallel_for(static_cast<std::size_t>(spec.n_trees), threads, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        // partial Fisher-Yates draw of `subsample` rows without replacement
        std::vector<int> rows(static_cast<std::size_t>(n));
        std::iota(rows.begin(), rows.end(), 0);
        for (int i = 0; i < subsample; ++i) {
            std::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(rows[static_cast<std::size_t>(i)],
                      rows[static_cast<std::size_t>(pick(rng))]);
        }
        std::vector<int> structure(rows.begin(), rows.begin() + subsample / 2);
        std::vector<int> estimation(rows.begin() + subsample / 2,
                                    rows.begin() + subsample);
        TreeBuilder builder(X, y_resid, t_resid, spec, max_features, rng);
        builder.grow(forest.trees_[t], structure, estimation, 0);
    });
    return forest;
}

Vector CausalForest::predict(const Matrix& X) const {
    Vector out = Vector::Zero(X.rows());
    for (const auto& tree : trees_) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out[i] += tree.predict_row(X, i);
        }
    }
    return out / static_cast<double>(trees_.size());
}

double CausalForest::predict_point(const Vector& x) const {
    double sum = 0.0;
    for (const auto& tree : trees_) {
        sum += tree.predict_point(x);
    }
    return sum / static_cast<double>(trees_.size());
}

CausalForest fit_causal_forest(const Matrix& X,
                               const dml::ResidualizedData& residuals,
                               const CausalForestSpec& spec, std::uint64_t seed,
                               int threads) {
    return CausalForest::fit(X, residuals.y_resid, residuals.t_resid, spec, seed,
                             threads);
}

ForestTuneResult tune_causal_forest(const Matrix& X,
                                    const dml::ResidualizedData& residuals,
                                    const std::vector<CausalForestSpec>& candidates,
                                    std::uint64_t seed, int threads,
                                    double holdout_fraction) {
    if (candidates.empty()) {
        throw ConfigError("InvalidSpec", "no forest candidates to tune over");
    }
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw ConfigError("InvalidSpec", "holdout_fraction must lie in (0,1)");
    }
    const Eigen::Index n = X.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, 400));
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::Index n_held = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(holdout_fraction * n));
    std::vector<Eigen::Index> held(order.begin(), order.begin() + n_held);
    std::vector<Eigen::Index> train(order.begin() + n_held, order.end());

    Matrix X_train = X(train, Eigen::all);
    Vector y_train = residuals.y_resid(train);
    Vector t_train = residuals.t_resid(train);
    Matrix X_held = X(held, Eigen::all);
    Vector y_held = residuals.y_resid(held);
    Vector t_held = residuals.t_resid(held);

    ForestTuneResult result;
    result.held_out_objectives.resize(candidates.size());
    double best = std::numeric_limits<double>::infinity();
    // one shared fit seed so identical candidates tie exactly
    std::uint64_t fit_seed = derive_seed(seed, 500);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto forest = CausalForest::fit(X_train, y_train, t_train, candidates[c],
                                        fit_seed, threads);
        Vector theta = forest.predict(X_held);
        double objective =
            (y_held - theta.cwiseProduct(t_held)).squaredNorm() /
            static_cast<double>(n_held);
        result.held_out_objectives[c] = objective;
        if (objective < best) {
            best = objective;
            result.best_index = c;
        }
    }
    result.best = candidates[result.best_index];
    return result;
}

InterpretationTree interpret_tree(const Matrix& X, const Vector& cates,
                                  int max_depth,
                                  std::vector<std::string> feature_names,
                                  int min_samples_leaf) {
    if (X.rows() == 0) {
        throw DataError("EmptyData", "interpretation tree needs samples");
    }
    if (X.rows() != cates.size()) {
        throw DataError("DimensionMismatch", "X and cates differ in length");
    }
    if (feature_names.empty()) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            feature_names.push_back("x" + std::to_string(j));
        }
    }

    InterpretationTree out;
    out.feature_names = std::move(feature_names);
    out.max_depth = max_depth;
    learners::TreeSpec spec;
    spec.max_depth = max_depth;
    spec.min_samples_leaf = min_samples_leaf;
    out.tree = learners::RegressionTree::fit(X, cates, spec);

    // two passes: leaf means first, then squared deviations, so constant
    // leaves report an exact zero spread
    const auto& nodes = out.tree.nodes();
    std::vector<int> leaf_of(static_cast<std::size_t>(X.rows()));
    std::vector<double> sum(nodes.size(), 0.0);
    std::vector<int> count(nodes.size(), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int node = 0;
        while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(node)];
            node = X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        leaf_of[static_cast<std::size_t>(i)] = node;
        sum[static_cast<std::size_t>(node)] += cates[i];
        count[static_cast<std::size_t>(node)] += 1;
    }
    std::vector<double> ss(nodes.size(), 0.0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        std::size_t k = static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)]);
        double deviation = cates[i] - sum[k] / count[k];
        ss[k] += deviation * deviation;
    }
    out.stats.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k].feature >= 0 || count[k] == 0) {
            continue;
        }
        auto& stats = out.stats[k];
        stats.n = count[k];
        stats.cate_mean = sum[k] / count[k];
        if (count[k] > 1) {
            stats.cate_std = std::sqrt(ss[k] / (count[k] - 1));
        }
        double half_width =
            1.96 * stats.cate_std / std::sqrt(static_cast<double>(stats.n));
        stats.ci_low = stats.cate_mean - half_width;
        stats.ci_high = stats.cate_mean + half_width;
    }
    return out;
}

const InterpretationLeafStats& InterpretationTree::leaf_stats(int node_id) const {
    return stats[static_cast<std::size_t>(node_id)];
}

namespace {

void render_node(const InterpretationTree& itree, int node_id, int indent,
                 std::ostringstream& os) {
    const auto& node = itree.tree.nodes()[static_cast<std::size_t>(node_id)];
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (node.feature < 0) {
        const auto& stats = itree.leaf_stats(node_id);
        os << pad << "leaf n=" << stats.n
           << " cate_mean=" << format_double(stats.cate_mean)
           << " cate_std=" << format_double(stats.cate_std) << " ci95=["
           << format_double(stats.ci_low) << ", " << format_double(stats.ci_high)
           << "]\n";
        return;
    }
    os << pad << "if " << itree.feature_names[static_cast<std::size_t>(node.feature)]
       << " <= " << format_double(node.threshold) << ":\n";
    render_node(itree, node.left, indent + 1, os);
    os << pad << "else:\n";
    render_node(itree, node.right, indent + 1, os);
}

} // namespace

std::string InterpretationTree::render_text() const {
    std::ostringstream os;
    render_node(*this, 0, 0, os);
    return os.str();
}

} // namespace agrisuit::causal
