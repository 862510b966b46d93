#ifndef AGRISUIT_LEARNERS_BOOSTING_HPP
#define AGRISUIT_LEARNERS_BOOSTING_HPP

#include "agrisuit/learners/tree.hpp"

namespace agrisuit::learners {

enum class BoostLoss { squared, logistic };

struct BoostSpec {
    int n_stages = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    int min_samples_leaf = 1;
    BoostLoss loss = BoostLoss::squared;
};

// Stagewise additive model: squared loss fits trees to residuals, logistic
// loss fits trees to negative gradients t - sigmoid(F).
class GradientBoostingModel {
public:
    static GradientBoostingModel fit(const Matrix& X, const Vector& y,
                                     const BoostSpec& spec);

    // Additive score after `stages` trees (-1 = all). Prefix-consistent:
    // predict_raw(X, k) depends on the first k trees only.
    Vector predict_raw(const Matrix& X, int stages = -1) const;

    // Squared loss: the raw score. Logistic loss: sigmoid of it.
    Vector predict(const Matrix& X, int stages = -1) const;
    double predict_point(const Vector& x) const;

    const std::vector<RegressionTree>& stages() const noexcept { return stages_; }
    std::vector<RegressionTree>& mutable_stages() noexcept { return stages_; }
    double init_value() const noexcept { return init_value_; }
    void set_init_value(double v) noexcept { init_value_ = v; }
    const BoostSpec& spec() const noexcept { return spec_; }
    BoostSpec& mutable_spec() noexcept { return spec_; }

private:
    std::vector<RegressionTree> stages_;
    double init_value_ = 0.0;
    BoostSpec spec_;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace agrisuit::learners

#endif
