#include "agrisuit/overlap.hpp"

#include "agrisuit/io/csv.hpp"

#include <algorithm>

namespace agrisuit::overlap {

namespace {

constexpr double kScoreClip = 1e-6;

} // namespace

Vector estimate_propensity(const Matrix& X, const Vector& t,
                           const learners::SearchSpec& spec, int k_folds,
                           std::uint64_t seed, int threads) {
    const Eigen::Index n = X.rows();
    if (n == 0) {
        throw DataError("EmptyData", "propensity estimation needs samples");
    }
    double mean = t.mean();
    if (mean <= 0.0 || mean >= 1.0) {
        throw EstimationError("SingleClass",
                              "propensity estimation needs both classes");
    }

    learners::ParamSet params;
    if (!spec.grid.empty()) {
        auto grid = learners::enumerate_grid(spec.grid);
        if (grid.size() == 1) {
            params = grid.front();
        } else {
            auto search = learners::grid_search_cv(X, t, spec,
                                                   derive_seed(seed, 11), threads);
            params = search.best_params;
        }
    }

    auto folds = learners::kfold_assignments(static_cast<std::size_t>(n), k_folds,
                                             derive_seed(seed, 13));
    Vector scores(n);
    std::vector<Matrix> fold_train_X(static_cast<std::size_t>(k_folds));
    std::vector<Vector> fold_train_t(static_cast<std::size_t>(k_folds));
    for (int f = 0; f < k_folds; ++f) {
        std::vector<Eigen::Index> train_rows;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (folds[static_cast<std::size_t>(i)] != f) {
                train_rows.push_back(i);
            }
        }
        fold_train_X[static_cast<std::size_t>(f)] = X(train_rows, Eigen::all);
        fold_train_t[static_cast<std::size_t>(f)] = t(train_rows);
    }
    parallel_for(static_cast<std::size_t>(k_folds), threads, [&](std::size_t f) {
        auto model = learners::fit_family(
            spec.family, params, fold_train_X[f], fold_train_t[f],
            derive_seed(seed, 100 + f), /*threads=*/1);
        std::vector<Eigen::Index> held_out;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (folds[static_cast<std::size_t>(i)] == static_cast<int>(f)) {
                held_out.push_back(i);
            }
        }
        Vector predicted = learners::predict_model(model, X(held_out, Eigen::all));
        for (std::size_t k = 0; k < held_out.size(); ++k) {
            scores[held_out[k]] = predicted[static_cast<Eigen::Index>(k)];
        }
    });

    for (Eigen::Index i = 0; i < n; ++i) {
        scores[i] = std::clamp(scores[i], kScoreClip, 1.0 - kScoreClip);
    }
    return scores;
}

Vector estimate_propensity(const Matrix& X, const Vector& t, int k_folds,
                           std::uint64_t seed, int threads) {
    learners::SearchSpec spec;
    spec.family = learners::ModelFamily::gradient_boosting_classifier;
    spec.grid = {{"n_stages", {100}}, {"learning_rate", {0.1}}, {"max_depth", {3}}};
    spec.scoring = learners::Scoring::f1;
    spec.k_folds = k_folds;
    return estimate_propensity(X, t, spec, k_folds, seed, threads);
}

PropensityReport trim_overlap(const Vector& scores, double low, double high) {
    if (!(low >= 0.0 && low < high && high <= 1.0)) {
        throw ConfigError("InvalidSpec", "trim bounds must satisfy 0 <= low < high <= 1");
    }
    PropensityReport report;
    report.low = low;
    report.high = high;
    report.entries.reserve(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        bool kept = scores[i] > low && scores[i] < high;
        report.entries.push_back({scores[i], kept});
        if (kept) {
            report.kept_indices.push_back(static_cast<std::size_t>(i));
        }
    }
    if (report.kept_indices.empty()) {
        throw DataError("EmptyResult", "overlap trimming removed every unit");
    }
    return report;
}

void write_propensity_report(const std::string& path,
                             const std::vector<std::string>& cell_ids,
                             const PropensityReport& report) {
    if (cell_ids.size() != report.entries.size()) {
        throw DataError("DimensionMismatch",
                        "cell ids and propensity entries differ in length");
    }
    io::CsvTable csv;
    csv.header = {"cell_id", "score", "kept"};
    for (std::size_t i = 0; i < cell_ids.size(); ++i) {
        csv.rows.push_back({cell_ids[i], format_double(report.entries[i].score),
                            report.entries[i].kept ? "1" : "0"});
    }
    io::write_csv(path, csv);
}

} // namespace agrisuit::overlap
