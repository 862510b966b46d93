#include "agrisuit/synthetic.hpp"

#include "agrisuit/learners/boosting.hpp"
#include "agrisuit/practices.hpp"

#include <cmath>
#include <random>

namespace agrisuit::synthetic {

namespace {

void validate(const SyntheticSpec& spec) {
    if (spec.n < 10) {
        throw ConfigError("InvalidSpec", "synthetic n must be >= 10");
    }
    if (spec.d < 1) {
        throw ConfigError("InvalidSpec", "synthetic d must be >= 1");
    }
    if (spec.outcome_noise < 0.0 || spec.confounding_strength < 0.0) {
        throw ConfigError("InvalidSpec", "noise and confounding must be >= 0");
    }
    if (spec.assignment_temperature <= 0.0) {
        throw ConfigError("InvalidSpec", "assignment temperature must be > 0");
    }
    if (!spec.feature_kinds.empty() &&
        spec.feature_kinds.size() != static_cast<std::size_t>(spec.d)) {
        throw ConfigError("InvalidSpec", "feature_kinds length must equal d");
    }
    if (!spec.feature_names.empty() &&
        spec.feature_names.size() != static_cast<std::size_t>(spec.d)) {
        throw ConfigError("InvalidSpec", "feature_names length must equal d");
    }
    int target = spec.theta.feature;
    if ((spec.theta.kind == ThetaKind::step ||
         spec.theta.kind == ThetaKind::quadratic) &&
        (target < 0 || target >= spec.d)) {
        throw ConfigError("InvalidSpec", "theta feature out of range");
    }
    if (spec.deterministic_assignment_feature &&
        (*spec.deterministic_assignment_feature < 0 ||
         *spec.deterministic_assignment_feature >= spec.d)) {
        throw ConfigError("InvalidSpec", "assignment feature out of range");
    }
}

FeatureKind kind_of(const SyntheticSpec& spec, int j) {
    if (!spec.feature_kinds.empty()) {
        return spec.feature_kinds[static_cast<std::size_t>(j)];
    }
    return j % 2 == 0 ? FeatureKind::std_normal : FeatureKind::uniform01;
}

int n_drivers(const SyntheticSpec& spec) { return std::min(3, spec.d); }

// confounding score w·x over the driver features, unit-norm weights
double driver_score(const SyntheticSpec& spec, const Vector& x) {
    int k = n_drivers(spec);
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
        s += x[j];
    }
    return s / std::sqrt(static_cast<double>(k));
}

} // namespace

double confounder_g(const SyntheticSpec& spec, const Vector& x) {
    // sinusoidal + quadratic + linear terms of the treatment drivers, so
    // linear nuisance models underfit while forests can track it
    int k = n_drivers(spec);
    double g = 2.0 * std::sin(2.0 * x[0]);
    if (k >= 2) {
        g += x[1] * x[1];
    }
    if (k >= 3) {
        g += 1.5 * x[2];
    }
    return g;
}

double oracle_cate(const SyntheticSpec& spec, const Vector& x) {
    if (x.size() != spec.d) {
        throw DataError("DimensionMismatch",
                        "oracle_cate expects a vector of length " +
                            std::to_string(spec.d));
    }
    const ThetaSpec& theta = spec.theta;
    switch (theta.kind) {
    case ThetaKind::constant:
        return theta.constant_value;
    case ThetaKind::linear: {
        double value = theta.linear_intercept;
        for (Eigen::Index j = 0;
             j < std::min<Eigen::Index>(x.size(), theta.linear_coefficients.size());
             ++j) {
            value += theta.linear_coefficients[j] * x[j];
        }
        return value;
    }
    case ThetaKind::step:
        return x[theta.feature] > theta.step_threshold ? theta.step_high
                                                       : theta.step_low;
    case ThetaKind::quadratic: {
        double centered = x[theta.feature] - theta.quad_center;
        return theta.quad_scale * centered * centered + theta.quad_offset;
    }
    }
    throw ConfigError("InvalidSpec", "unhandled theta kind");
}

Vector oracle_cate(const SyntheticSpec& spec, const Matrix& X) {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Vector x = X.row(i).transpose();
        out[i] = oracle_cate(spec, x);
    }
    return out;
}

SyntheticData generate_plm(const SyntheticSpec& spec) {
    validate(spec);
    const int n = spec.n;
    const int d = spec.d;

    SyntheticData out;
    out.table.feature_names.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        out.table.feature_names[static_cast<std::size_t>(j)] =
            spec.feature_names.empty() ? "x" + std::to_string(j)
                                       : spec.feature_names[static_cast<std::size_t>(j)];
    }

    Matrix X(n, d);
    Vector raw_score(n), epsilon(n), uniform_draw(n);
    // per-unit counter-based RNG keeps generation reproducible even if
    // callers parallelize over units
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif01(0.0, 1.0);
        for (int j = 0; j < d; ++j) {
            switch (kind_of(spec, j)) {
            case FeatureKind::std_normal:
                X(i, j) = normal(rng);
                break;
            case FeatureKind::uniform01:
                X(i, j) = unif01(rng);
                break;
            case FeatureKind::uniform_sym:
                X(i, j) = 2.0 * unif01(rng) - 1.0;
                break;
            }
        }
        epsilon[i] = normal(rng);
        uniform_draw[i] = unif01(rng);
        // logistic noise for the continuous-treatment variant
        double u = std::clamp(unif01(rng), 1e-12, 1.0 - 1e-12);
        raw_score[i] = std::log(u / (1.0 - u));
    }

    Vector treated(n), treatment_raw(n);
    out.propensity = Vector(n);
    if (spec.deterministic_assignment_feature) {
        int j = *spec.deterministic_assignment_feature;
        for (int i = 0; i < n; ++i) {
            treated[i] = X(i, j) > 0.0 ? 1.0 : 0.0;
            treatment_raw[i] = treated[i];
            out.propensity[i] = treated[i];
        }
    } else if (spec.continuous_treatment) {
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double s = spec.confounding_strength *
                       driver_score(spec, X.row(i).transpose());
            treatment_raw[i] = s + spec.assignment_temperature * raw_score[i];
            scores[static_cast<std::size_t>(i)] = treatment_raw[i];
        }
        double m = practices::median(scores);
        for (int i = 0; i < n; ++i) {
            treated[i] = treatment_raw[i] > m ? 1.0 : 0.0;
            // the induced assignment is still a function of X and noise only
            double s = spec.confounding_strength *
                       driver_score(spec, X.row(i).transpose());
            out.propensity[i] =
                learners::sigmoid((s - m) / spec.assignment_temperature);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            double s = spec.confounding_strength *
                       driver_score(spec, X.row(i).transpose());
            double p = learners::sigmoid(s / spec.assignment_temperature);
            p = std::clamp(p, 1e-9, 1.0 - 1e-9);
            out.propensity[i] = p;
            treated[i] = uniform_draw[i] < p ? 1.0 : 0.0;
            treatment_raw[i] = treated[i];
        }
    }

    out.true_cate = oracle_cate(spec, X);

    int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    out.table.rows.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& row = out.table.rows[static_cast<std::size_t>(i)];
        char id[16];
        std::snprintf(id, sizeof(id), "s%06d", i);
        row.cell_id = id;
        row.centroid_lon = (i % side) * 0.01;
        row.centroid_lat = (i / side) * 0.01;
        row.x = X.row(i).transpose();
        row.treatment_raw = treatment_raw[i];
        row.treated = static_cast<int>(treated[i]);
        row.y = out.true_cate[i] * treated[i] +
                confounder_g(spec, row.x) + spec.outcome_noise * epsilon[i];
    }
    return out;
}

} // namespace agrisuit::synthetic
