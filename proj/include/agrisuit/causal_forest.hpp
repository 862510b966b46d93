#ifndef AGRISUIT_CAUSAL_FOREST_HPP
#define AGRISUIT_CAUSAL_FOREST_HPP

#include "agrisuit/dml.hpp"
#include "agrisuit/learners/tree.hpp"

namespace agrisuit::causal {

struct CausalForestSpec {
    int n_trees = 1000;
    double subsample_fraction = 0.45; // of the training set, without replacement
    int min_samples_leaf = 5;         // enforced on both honesty halves
    int max_depth = -1;
    int max_features = -1;            // features scanned per split; -1 = all
    double max_features_fraction = 1.0;
    double min_residual_ssq = 1e-8;   // min Σ T̃² per child, both halves

    int resolved_max_features(int n_features) const;
};

// Honest causal tree: the structure half chooses splits by maximizing the
// heterogeneity score Σ_child n_child·τ̂²_child, the disjoint estimation
// half populates leaf effects τ̂ = Σ T̃Ỹ / Σ T̃².
class CausalTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double tau = 0.0;
        int n_estimation = 0;
    };

    std::vector<Node> nodes;
    // estimation-set rows per leaf node (empty for internal nodes);
    // kept so honesty is auditable, not serialized
    std::vector<std::vector<int>> leaf_estimation_rows;

    double predict_row(const Matrix& X, Eigen::Index row) const;
    double predict_point(const Vector& x) const;
};

class CausalForest {
public:
    static CausalForest fit(const Matrix& X, const Vector& y_resid,
                            const Vector& t_resid, const CausalForestSpec& spec,
                            std::uint64_t seed, int threads = 1);

    Vector predict(const Matrix& X) const;
    double predict_point(const Vector& x) const;

    const std::vector<CausalTree>& trees() const noexcept { return trees_; }
    std::vector<CausalTree>& mutable_trees() noexcept { return trees_; }
    const CausalForestSpec& spec() const noexcept { return spec_; }
    CausalForestSpec& mutable_spec() noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

private:
    std::vector<CausalTree> trees_;
    CausalForestSpec spec_;
    std::uint64_t seed_ = 0;
};

CausalForest fit_causal_forest(const Matrix& X,
                               const dml::ResidualizedData& residuals,
                               const CausalForestSpec& spec, std::uint64_t seed,
                               int threads = 1);

// Out-of-sample tuning. True CATEs are unobservable, so candidates are
// scored by the final-stage residual objective mean (Ỹ - θ̂(X)·T̃)² on a
// held-out slice of the residualized data; ties keep the first candidate.
struct ForestTuneResult {
    CausalForestSpec best;
    std::size_t best_index = 0;
    std::vector<double> held_out_objectives;
};

ForestTuneResult tune_causal_forest(const Matrix& X,
                                    const dml::ResidualizedData& residuals,
                                    const std::vector<CausalForestSpec>& candidates,
                                    std::uint64_t seed, int threads = 1,
                                    double holdout_fraction = 0.2);

// Depth-constrained CART over predicted CATEs with per-leaf sample size,
// mean, standard deviation and a normal-approximation 95% interval.
struct InterpretationLeafStats {
    int n = 0;
    double cate_mean = 0.0;
    double cate_std = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct InterpretationTree {
    learners::RegressionTree tree;
    std::vector<std::string> feature_names;
    std::vector<InterpretationLeafStats> stats; // parallel to tree.nodes()
    int max_depth = 2;

    // indented text: boolean condition per node, left branch when true
    std::string render_text() const;
    const InterpretationLeafStats& leaf_stats(int node_id) const;
};

InterpretationTree interpret_tree(const Matrix& X, const Vector& cates,
                                  int max_depth = 2,
                                  std::vector<std::string> feature_names = {},
                                  int min_samples_leaf = 1);

} // namespace agrisuit::causal

#endif
