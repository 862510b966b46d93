#ifndef AGRISUIT_SYNTHETIC_HPP
#define AGRISUIT_SYNTHETIC_HPP

#include "agrisuit/data_model.hpp"

#include <optional>

namespace agrisuit::synthetic {

enum class ThetaKind { constant, linear, step, quadratic };

// Effect function θ(x). linear: a·x + b; step: low + (high-low)·1{x_f > thr};
// quadratic: scale·(x_f - center)^2 + offset.
struct ThetaSpec {
    ThetaKind kind = ThetaKind::constant;
    double constant_value = 0.0;
    Vector linear_coefficients; // size d (zero-padded if shorter)
    double linear_intercept = 0.0;
    int feature = 0;
    double step_threshold = 0.0;
    double step_low = 0.0;
    double step_high = 2.0;
    double quad_scale = 1.0;
    double quad_center = 0.0;
    double quad_offset = 0.0;
};

enum class FeatureKind { std_normal, uniform01, uniform_sym };

// Partially linear DGP: X from per-feature distributions,
// T ~ Bernoulli(sigmoid(γ · w·x / temperature)) on the confounding
// drivers, Y = θ(x)·T + g(x) + σ_Y·ε with g a smooth nonlinear function
// of the same drivers.
struct SyntheticSpec {
    int n = 1000;
    int d = 6;
    ThetaSpec theta;
    double confounding_strength = 1.0; // γ; 0 = randomized experiment
    double outcome_noise = 1.0;        // σ_Y
    double assignment_temperature = 1.0;
    std::uint64_t seed = 0;
    std::vector<FeatureKind> feature_kinds; // default: alternating normal/uniform01
    std::vector<std::string> feature_names; // default: x0..x{d-1}
    // emit a continuous raw treatment (logistic-noise score) and binarize
    // at the sample median instead of drawing T directly
    bool continuous_treatment = false;
    // overrides assignment: T = 1{x_j > 0}; propensities become 0/1
    std::optional<int> deterministic_assignment_feature;
};

struct SyntheticData {
    data::CrossSectionTable table;
    Vector true_cate;
    Vector propensity;
};

SyntheticData generate_plm(const SyntheticSpec& spec);

double oracle_cate(const SyntheticSpec& spec, const Vector& x);
Vector oracle_cate(const SyntheticSpec& spec, const Matrix& X);

// The smooth confounder g(x); exposed so tests can reason about bias.
double confounder_g(const SyntheticSpec& spec, const Vector& x);

} // namespace agrisuit::synthetic

#endif
