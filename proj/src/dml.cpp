#include "agrisuit/dml.hpp"

#include "agrisuit/causal_forest.hpp"
#include "agrisuit/learners/metrics.hpp"
#include "agrisuit/learners/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agrisuit::dml {

NuisanceSpec NuisanceSpec::defaults() {
    NuisanceSpec spec;
    spec.outcome_model = learners::default_search(learners::ModelFamily::random_forest);
    spec.treatment_model = learners::default_search(learners::ModelFamily::logistic);
    return spec;
}

namespace {

Vector to_labels(const Vector& proba) {
    return proba.unaryExpr([](double p) { return p > 0.5 ? 1.0 : 0.0; });
}

} // namespace

ResidualizedData crossfit_residualize(const Matrix& X, const Vector& y,
                                      const Vector& t, const NuisanceSpec& spec,
                                      std::uint64_t seed, int threads) {
    const Eigen::Index n = X.rows();
    if (n == 0 || y.size() != n || t.size() != n) {
        throw DataError("DimensionMismatch", "X, y, t must share the row count");
    }
    if (spec.k_folds < 2) {
        throw ConfigError("InvalidSpec", "k_folds must be >= 2");
    }
    if (!(spec.eval_split > 0.0 && spec.eval_split <= 0.5)) {
        throw ConfigError("InvalidSpec", "eval_split must lie in (0, 0.5]");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (t[i] != 0.0 && t[i] != 1.0) {
            throw DataError("InvalidSpec", "treatment must be binary 0/1");
        }
    }
    double t_mean = t.mean();
    if (t_mean <= 0.0 || t_mean >= 1.0) {
        throw EstimationError("SingleClass", "treatment has a single class");
    }

    // scaling lives inside the first stage only
    auto scaler = learners::MaxAbsScaler::fit(X);
    Matrix Xs = scaler.transform(X);

    // 80-20 split for the generalization report; model selection runs once
    // on the training portion and the chosen settings are reused everywhere
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 split_rng(derive_seed(seed, 1));
    std::shuffle(order.begin(), order.end(), split_rng);
    Eigen::Index n_test = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(spec.eval_split * n)));
    std::vector<Eigen::Index> test_rows(order.begin(), order.begin() + n_test);
    std::vector<Eigen::Index> train_rows(order.begin() + n_test, order.end());

    Matrix X_train = Xs(train_rows, Eigen::all);
    Matrix X_test = Xs(test_rows, Eigen::all);
    Vector y_train = y(train_rows), y_test = y(test_rows);
    Vector t_train = t(train_rows), t_test = t(test_rows);

    ResidualizedData out;
    out.report.outcome_family = learners::family_name(spec.outcome_model.family);
    out.report.treatment_family = learners::family_name(spec.treatment_model.family);

    auto select = [&](const learners::SearchSpec& search, const Vector& target,
                      std::uint64_t search_seed) {
        auto grid = learners::enumerate_grid(search.grid);
        if (grid.size() == 1) {
            return grid.front();
        }
        return learners::grid_search_cv(X_train, target, search, search_seed,
                                        threads)
            .best_params;
    };
    out.report.outcome_params =
        select(spec.outcome_model, y_train, derive_seed(seed, 2));
    out.report.treatment_params =
        select(spec.treatment_model, t_train, derive_seed(seed, 3));

    {
        auto outcome_model =
            learners::fit_family(spec.outcome_model.family, out.report.outcome_params,
                                 X_train, y_train, derive_seed(seed, 4), threads);
        out.report.outcome_train_r2 = learners::r2_score(
            y_train, learners::predict_model(outcome_model, X_train));
        out.report.outcome_test_r2 = learners::r2_score(
            y_test, learners::predict_model(outcome_model, X_test));

        auto treatment_model = learners::fit_family(
            spec.treatment_model.family, out.report.treatment_params, X_train,
            t_train, derive_seed(seed, 5), threads);
        out.report.treatment_train_f1 = learners::f1_score(
            t_train, to_labels(learners::predict_model(treatment_model, X_train)));
        out.report.treatment_test_f1 = learners::f1_score(
            t_test, to_labels(learners::predict_model(treatment_model, X_test)));
    }

    // cross-fitting over all units with the selected hyperparameters
    out.fold_id = learners::kfold_assignments(static_cast<std::size_t>(n),
                                              spec.k_folds, derive_seed(seed, 6));
    out.y_resid = Vector(n);
    out.t_resid = Vector(n);

    std::vector<std::vector<Eigen::Index>> fold_rows(
        static_cast<std::size_t>(spec.k_folds));
    std::vector<std::vector<Eigen::Index>> rest_rows(
        static_cast<std::size_t>(spec.k_folds));
    for (Eigen::Index i = 0; i < n; ++i) {
        int f = out.fold_id[static_cast<std::size_t>(i)];
        for (int g = 0; g < spec.k_folds; ++g) {
            (g == f ? fold_rows : rest_rows)[static_cast<std::size_t>(g)]
                .push_back(i);
        }
    }

    // 2 tasks per fold: outcome model and treatment model
    parallel_for(static_cast<std::size_t>(spec.k_folds) * 2, threads,
                 [&](std::size_t task) {
                     std::size_t f = task / 2;
                     bool outcome = task % 2 == 0;
                     Matrix X_fit = Xs(rest_rows[f], Eigen::all);
                     Matrix X_out = Xs(fold_rows[f], Eigen::all);
                     if (outcome) {
                         auto model = learners::fit_family(
                             spec.outcome_model.family, out.report.outcome_params,
                             X_fit, y(rest_rows[f]), derive_seed(seed, 100 + f),
                             /*threads=*/1);
                         Vector predicted = learners::predict_model(model, X_out);
                         for (std::size_t k = 0; k < fold_rows[f].size(); ++k) {
                             Eigen::Index row = fold_rows[f][k];
                             out.y_resid[row] =
                                 y[row] - predicted[static_cast<Eigen::Index>(k)];
                         }
                     } else {
                         auto model = learners::fit_family(
                             spec.treatment_model.family,
                             out.report.treatment_params, X_fit, t(rest_rows[f]),
                             derive_seed(seed, 200 + f), /*threads=*/1);
                         Vector predicted = learners::predict_model(model, X_out);
                         for (std::size_t k = 0; k < fold_rows[f].size(); ++k) {
                             Eigen::Index row = fold_rows[f][k];
                             out.t_resid[row] =
                                 t[row] - predicted[static_cast<Eigen::Index>(k)];
                         }
                     }
                 });

    double t_var = (out.t_resid.array() - out.t_resid.mean()).square().sum() /
                   static_cast<double>(n);
    if (t_var < 1e-12) {
        throw EstimationError("DegenerateResiduals",
                              "treatment residual variance below 1e-12");
    }
    return out;
}

LinearCate fit_linear_cate(const ResidualizedData& residuals, const Matrix& X,
                           LinearBasis basis) {
    const Eigen::Index n = residuals.y_resid.size();
    if (n == 0 || residuals.t_resid.size() != n) {
        throw DataError("DimensionMismatch", "residual vectors must match");
    }
    const Vector& ty = residuals.y_resid;
    const Vector& tt = residuals.t_resid;

    LinearCate out;
    out.basis = basis;
    if (basis == LinearBasis::intercept_only) {
        double sum_tt = tt.squaredNorm();
        if (sum_tt < 1e-12) {
            throw EstimationError("DegenerateResiduals",
                                  "sum of squared treatment residuals is ~0");
        }
        double theta = tt.dot(ty) / sum_tt;
        double meat = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double e = ty[i] - theta * tt[i];
            meat += tt[i] * tt[i] * e * e;
        }
        double variance = meat / (sum_tt * sum_tt);
        out.coefficients = Vector::Constant(1, theta);
        out.covariance = Matrix::Constant(1, 1, variance);
        out.ate = theta;
        out.ate_se = std::sqrt(variance);
    } else {
        if (X.rows() != n) {
            throw DataError("DimensionMismatch", "X rows must match residuals");
        }
        const Eigen::Index p = X.cols() + 1;
        Matrix M(n, p);
        M.col(0) = tt;
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            M.col(j + 1) = tt.cwiseProduct(X.col(j));
        }
        Matrix gram = M.transpose() * M;
        Eigen::LDLT<Matrix> solver(gram);
        if (solver.info() != Eigen::Success) {
            throw EstimationError("DegenerateResiduals",
                                  "singular final-stage design");
        }
        Vector beta = solver.solve(M.transpose() * ty);
        Vector errors = ty - M * beta;
        Matrix meat = Matrix::Zero(p, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            meat.noalias() +=
                errors[i] * errors[i] * (M.row(i).transpose() * M.row(i));
        }
        Matrix bread = solver.solve(Matrix::Identity(p, p));
        out.coefficients = beta;
        out.covariance = bread * meat * bread;

        Vector mean_basis(p);
        mean_basis[0] = 1.0;
        mean_basis.tail(X.cols()) = X.colwise().mean().transpose();
        out.ate = mean_basis.dot(beta);
        out.ate_se =
            std::sqrt(std::max(0.0, mean_basis.dot(out.covariance * mean_basis)));
    }
    out.ate_ci_low = out.ate - 1.96 * out.ate_se;
    out.ate_ci_high = out.ate + 1.96 * out.ate_se;
    return out;
}

double CateModel::predict(const Vector& x) const {
    if (kind == CateKind::causal_forest) {
        return forest->predict_point(x);
    }
    if (linear.basis == LinearBasis::intercept_only) {
        return linear.coefficients[0];
    }
    double value = linear.coefficients[0];
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        value += linear.coefficients[j + 1] * x[j];
    }
    return value;
}

Vector CateModel::predict(const Matrix& X) const {
    if (static_cast<std::size_t>(X.cols()) != feature_names.size()) {
        throw DataError("DimensionMismatch",
                        "expected " + std::to_string(feature_names.size()) +
                            " features, got " + std::to_string(X.cols()));
    }
    if (kind == CateKind::causal_forest) {
        return forest->predict(X);
    }
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Vector x = X.row(i).transpose();
        out[i] = predict(x);
    }
    return out;
}

void CateModel::check_features(const std::vector<std::string>& names) const {
    if (names != feature_names) {
        for (const auto& name : names) {
            if (std::find(feature_names.begin(), feature_names.end(), name) ==
                feature_names.end()) {
                throw DataError("UnknownFeature",
                                "feature '" + name + "' not seen in training");
            }
        }
        throw DataError("UnknownFeature",
                        "feature names do not match the training order");
    }
}

CateModel fit_dml(const Matrix& X, const Vector& y, const Vector& t,
                  const std::vector<std::string>& feature_names,
                  const NuisanceSpec& nuisance, const DmlOptions& options,
                  std::uint64_t seed) {
    if (X.rows() < options.min_units) {
        throw DataError("EmptyData",
                        "fit_dml needs at least " +
                            std::to_string(options.min_units) + " units, got " +
                            std::to_string(X.rows()));
    }
    if (static_cast<std::size_t>(X.cols()) != feature_names.size()) {
        throw DataError("DimensionMismatch", "feature names must match X");
    }

    CateModel model;
    model.kind = options.final_stage;
    model.feature_names = feature_names;
    model.seed = seed;
    model.feature_min = X.colwise().minCoeff().transpose();
    model.feature_max = X.colwise().maxCoeff().transpose();

    ResidualizedData residuals =
        crossfit_residualize(X, y, t, nuisance, seed, options.threads);
    model.first_stage = residuals.report;

    // the intercept-only closed form is always computed: it is the ATE for
    // the linear kind and the interval source for the forest kind
    LinearCate intercept = fit_linear_cate(residuals, X, LinearBasis::intercept_only);

    if (options.final_stage == CateKind::linear) {
        model.linear = options.linear_basis == LinearBasis::intercept_only
                           ? intercept
                           : fit_linear_cate(residuals, X, options.linear_basis);
        model.ate = model.linear.ate;
        model.ate_ci_low = model.linear.ate_ci_low;
        model.ate_ci_high = model.linear.ate_ci_high;
    } else {
        model.linear = intercept;
        causal::CausalForestSpec forest_spec;
        if (options.forest_spec) {
            forest_spec = *options.forest_spec;
        }
        auto forest = std::make_shared<causal::CausalForest>(
            causal::CausalForest::fit(X, residuals.y_resid, residuals.t_resid,
                                      forest_spec, derive_seed(seed, 7),
                                      options.threads));
        model.forest = forest;
        Vector cates = forest->predict(X);
        model.ate = cates.mean();
        model.ate_ci_low = model.ate - 1.96 * intercept.ate_se;
        model.ate_ci_high = model.ate + 1.96 * intercept.ate_se;
    }
    return model;
}

} // namespace agrisuit::dml
