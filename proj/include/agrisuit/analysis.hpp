#ifndef AGRISUIT_ANALYSIS_HPP
#define AGRISUIT_ANALYSIS_HPP

#include "agrisuit/data_model.hpp"
#include "agrisuit/dml.hpp"

#include <string>
#include <vector>

namespace agrisuit::analysis {

// Spearman rank correlation: Pearson correlation of mid-ranks (ties get
// the average rank).
double spearman(const Vector& a, const Vector& b);

struct Histogram {
    std::vector<double> edges;  // bins + 1 values
    std::vector<long> counts;   // sums to the sample size
};

// Equal-width bins over [min, max]; the upper edge is inclusive. A
// zero-width range puts all mass in the first bin.
Histogram cate_histogram(const Vector& cates, int bins);

struct SuitabilityRow {
    std::string cell_id;
    double centroid_lon = 0.0;
    double centroid_lat = 0.0;
    double cate = 0.0;
    int treated = 0;
    double treatment_raw = 0.0;
};

struct SuitabilityMap {
    std::vector<SuitabilityRow> rows; // sorted by cell_id
};

// One row per estimated cell; `cates` is parallel to `table.rows`.
SuitabilityMap build_suitability_map(const data::CrossSectionTable& table,
                                     const Vector& cates);

void write_map_csv(const std::string& path, const SuitabilityMap& map);
// GeoJSON point collection; written with a fixed field order so re-exports
// are byte-identical.
void write_map_geojson(const std::string& path, const SuitabilityMap& map);

struct ShiftSpec {
    std::vector<std::pair<std::string, double>> deltas; // feature -> additive shift
    double extrapolation_threshold = 0.05; // flagged-fraction alarm level
};

struct ShiftResult {
    Vector shifted_cates;
    std::vector<bool> extrapolated; // any feature outside the training range
    double flagged_fraction = 0.0;
    bool threshold_exceeded = false;
};

// θ̂(x + δ) per unit, with per-point extrapolation flags against the
// model's observed training ranges.
ShiftResult counterfactual_shift(const dml::CateModel& model, const Matrix& X,
                                 const ShiftSpec& shift);

// Per-feature Spearman correlation with the predicted CATEs.
std::vector<std::pair<std::string, double>> spearman_table(
    const Matrix& X, const std::vector<std::string>& feature_names,
    const Vector& cates);

// (feature..., cate) wide table for external plotting of CATE-vs-feature
// relationships.
void write_cate_by_feature(const std::string& path,
                           const data::CrossSectionTable& table,
                           const Vector& cates);

void write_histogram_csv(const std::string& path, const Histogram& histogram);

std::vector<double> cate_quantiles(const Vector& cates);

} // namespace agrisuit::analysis

#endif
