#ifndef AGRISUIT_OVERLAP_HPP
#define AGRISUIT_OVERLAP_HPP

#include "agrisuit/learners/model_selection.hpp"

#include <string>
#include <vector>

namespace agrisuit::overlap {

struct PropensityEntry {
    double score = 0.0; // ê(x), clipped into [1e-6, 1-1e-6]
    bool kept = false;  // low < score < high, strict on both sides
};

struct PropensityReport {
    std::vector<PropensityEntry> entries;
    double low = 0.2;
    double high = 0.8;
    std::string estimator;
    std::vector<std::size_t> kept_indices;
};

// Out-of-fold propensity scores: every unit is scored by a model fit on
// the folds that exclude it, so a flexible model cannot make its own
// training points look extreme.
Vector estimate_propensity(const Matrix& X, const Vector& t,
                           const learners::SearchSpec& spec, int k_folds,
                           std::uint64_t seed, int threads = 1);

// Default estimator: gradient boosting classifier, single grid point.
Vector estimate_propensity(const Matrix& X, const Vector& t, int k_folds,
                           std::uint64_t seed, int threads = 1);

PropensityReport trim_overlap(const Vector& scores, double low = 0.2,
                              double high = 0.8);

void write_propensity_report(const std::string& path,
                             const std::vector<std::string>& cell_ids,
                             const PropensityReport& report);

} // namespace agrisuit::overlap

#endif
