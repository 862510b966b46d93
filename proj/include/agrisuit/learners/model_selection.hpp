#ifndef AGRISUIT_LEARNERS_MODEL_SELECTION_HPP
#define AGRISUIT_LEARNERS_MODEL_SELECTION_HPP

#include "agrisuit/learners/boosting.hpp"
#include "agrisuit/learners/linear_models.hpp"
#include "agrisuit/learners/random_forest.hpp"

#include <variant>

namespace agrisuit::learners {

enum class ModelFamily {
    random_forest,
    gradient_boosting,
    gradient_boosting_classifier,
    logistic,
    lasso,
};

enum class Scoring { r2, f1 };

std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

// Ordered so "first grid point" is well defined for tie-breaking.
using ParamSet = std::vector<std::pair<std::string, double>>;
using ParamGrid = std::vector<std::pair<std::string, std::vector<double>>>;

double param_or(const ParamSet& params, const std::string& name, double fallback);

struct SearchSpec {
    ModelFamily family = ModelFamily::random_forest;
    ParamGrid grid;
    int k_folds = 3;
    Scoring scoring = Scoring::r2;
};

SearchSpec default_search(ModelFamily family);

struct GridPointResult {
    ParamSet params;
    std::vector<double> fold_scores;
    double mean_score = 0.0;
};

struct GridSearchResult {
    ParamSet best_params;
    double best_score = 0.0;
    std::vector<GridPointResult> table;
};

// Shuffled fold labels in [0, k); a pure function of (n, k, seed).
std::vector<int> kfold_assignments(std::size_t n, int k, std::uint64_t seed);

// Mean out-of-fold score per grid point over folds fixed by `seed`;
// ties keep the earliest grid point.
GridSearchResult grid_search_cv(const Matrix& X, const Vector& y,
                                const SearchSpec& spec, std::uint64_t seed,
                                int threads = 1);

using FittedModel = std::variant<RandomForestRegressor, GradientBoostingModel,
                                 LogisticRegressionModel, LassoModel>;

FittedModel fit_family(ModelFamily family, const ParamSet& params,
                       const Matrix& X, const Vector& y, std::uint64_t seed,
                       int threads = 1);

// Regression families return predictions, classifier families return
// probabilities of class 1.
Vector predict_model(const FittedModel& model, const Matrix& X);

std::vector<ParamSet> enumerate_grid(const ParamGrid& grid);

} // namespace agrisuit::learners

#endif
