#ifndef AGRISUIT_DML_HPP
#define AGRISUIT_DML_HPP

#include "agrisuit/learners/model_selection.hpp"

#include <memory>

namespace agrisuit::causal {
class CausalForest;
struct CausalForestSpec;
} // namespace agrisuit::causal

namespace agrisuit::dml {

// First-stage configuration: the outcome regression g (Y ~ X) and the
// propensity-style treatment model f (T ~ X).
struct NuisanceSpec {
    learners::SearchSpec outcome_model;
    learners::SearchSpec treatment_model;
    int k_folds = 3;
    double eval_split = 0.2; // held-out share for the generalization report

    static NuisanceSpec defaults();
};

struct FirstStageReport {
    double outcome_train_r2 = 0.0;
    double outcome_test_r2 = 0.0;
    double treatment_train_f1 = 0.0;
    double treatment_test_f1 = 0.0;
    std::string outcome_family;
    std::string treatment_family;
    learners::ParamSet outcome_params;
    learners::ParamSet treatment_params;
};

// Out-of-fold residuals: unit i's residual comes from models fit on folds
// excluding i.
struct ResidualizedData {
    Vector y_resid; // Ỹ = Y - ĝ(X)
    Vector t_resid; // T̃ = T - p̂(X), probability predictions
    std::vector<int> fold_id;
    FirstStageReport report;
};

// Cross-fitted residualization. Max-abs scaling is applied to X inside
// this stage only; the 80-20 split feeds the train/test rows of the
// report while residuals come from k-fold cross-fitting over all units.
// Hyperparameters are selected once, on the 80% training portion.
ResidualizedData crossfit_residualize(const Matrix& X, const Vector& y,
                                      const Vector& t, const NuisanceSpec& spec,
                                      std::uint64_t seed, int threads = 1);

enum class LinearBasis { intercept_only, linear_in_x };

// Least squares of Ỹ on T̃·φ(X) with heteroskedasticity-robust (HC0)
// covariance; intercept_only reduces to θ̂ = Σ T̃Ỹ / Σ T̃² = ATE.
struct LinearCate {
    LinearBasis basis = LinearBasis::intercept_only;
    Vector coefficients;  // φ = [1] or [1, x]
    Matrix covariance;
    double ate = 0.0;
    double ate_se = 0.0;
    double ate_ci_low = 0.0;
    double ate_ci_high = 0.0;
};

LinearCate fit_linear_cate(const ResidualizedData& residuals, const Matrix& X,
                           LinearBasis basis);

enum class CateKind { linear, causal_forest };

struct CateModel {
    CateKind kind = CateKind::linear;
    std::vector<std::string> feature_names;
    LinearCate linear; // always fitted: carries the ATE path
    std::shared_ptr<const causal::CausalForest> forest; // causal_forest kind
    double ate = 0.0;
    double ate_ci_low = 0.0;
    double ate_ci_high = 0.0;
    FirstStageReport first_stage;
    Vector feature_min; // observed training ranges, for extrapolation flags
    Vector feature_max;
    std::uint64_t seed = 0;

    double predict(const Vector& x) const;
    Vector predict(const Matrix& X) const;
    // maps named columns onto the training order; throws UnknownFeature
    void check_features(const std::vector<std::string>& names) const;
};

struct DmlOptions {
    CateKind final_stage = CateKind::linear;
    LinearBasis linear_basis = LinearBasis::intercept_only;
    int min_units = 200;
    int threads = 1;
    // forest settings live in causal::CausalForestSpec; null = defaults
    std::shared_ptr<const causal::CausalForestSpec> forest_spec;
};

// Full estimator: cross-fitted residualization then the chosen final
// stage. The causal-forest path reports ATE as the mean per-unit CATE with
// the interval width taken from the intercept-only robust SE.
CateModel fit_dml(const Matrix& X, const Vector& y, const Vector& t,
                  const std::vector<std::string>& feature_names,
                  const NuisanceSpec& nuisance, const DmlOptions& options,
                  std::uint64_t seed);

} // namespace agrisuit::dml

#endif
