#ifndef AGRISUIT_DATA_MODEL_HPP
#define AGRISUIT_DATA_MODEL_HPP

#include "agrisuit/common.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agrisuit::data {

// Spatial unit of the analysis. Coordinates are planar (or locally planar)
// in the same CRS as any parcel input; cell_size_m is the square edge in
// the CRS linear unit.
struct GridCell {
    std::string cell_id;
    double centroid_lon = 0.0;
    double centroid_lat = 0.0;
    double cell_size_m = 500.0;
};

// One (cell, year) observation: per-crop area fractions, environmental
// features, and optionally the year's outcome.
struct PanelRecord {
    std::string cell_id;
    int year = 0;
    std::map<std::string, double> abundances;   // crop -> fraction of cell area
    std::map<std::string, double> environment;  // feature -> value
    std::optional<double> outcome;
};

struct PanelDataset {
    std::vector<GridCell> cells;
    std::vector<PanelRecord> records;
    std::vector<int> study_years; // ordered

    const GridCell* find_cell(const std::string& cell_id) const;
};

// Column mapping for the delimited panel input. Abundance and environment
// columns keep their header names as crop / feature names.
struct PanelSchema {
    std::string cell_id_column = "cell_id";
    std::string year_column = "year";
    std::string outcome_column = "outcome";
    std::vector<std::string> abundance_columns;
    std::vector<std::string> environment_columns;
    std::optional<std::string> lon_column;
    std::optional<std::string> lat_column;
    double cell_size_m = 500.0;
    std::optional<int> year_min; // inclusive study period bounds
    std::optional<int> year_max;
};

// Reads and validates the panel. Any violating row is reported on `diag`
// as `row=<n> code=<CODE> detail=<text>` (n = line number in the file,
// header = line 1) and the load fails with the first diagnostic's code.
PanelDataset load_panel(const std::string& path, const PanelSchema& schema,
                        std::ostream* diag = nullptr);

// Keeps cells whose period-mean total abundance is >= threshold
// (inclusive); all years of a retained cell are kept.
PanelDataset filter_cropland(const PanelDataset& panel, double threshold = 0.8);

enum class TreatmentKind { sum, mean };

// One estimation-ready row. `treated` is -1 until binarization assigns it.
struct CrossSectionRow {
    std::string cell_id;
    double centroid_lon = 0.0;
    double centroid_lat = 0.0;
    Vector x;
    double treatment_raw = 0.0;
    int treated = -1;
    double y = 0.0;
};

struct CrossSectionTable {
    std::vector<std::string> feature_names;
    std::vector<CrossSectionRow> rows;

    Matrix features() const;
    Vector outcomes() const;
    Vector treatments() const; // requires treated set on every row
    Vector treatment_raws() const;
};

// Per-cell temporal aggregation: environment features, major-crop
// abundances and the outcome are averaged over years; treatment_raw is the
// sum (crop rotation) or mean (crop diversity) of the cell's series.
// Cells with fewer than two yearly records raise InconsistentYears; cells
// with a missing outcome year are dropped with a diagnostic.
CrossSectionTable aggregate_temporal(
    const PanelDataset& panel,
    const std::map<std::string, std::vector<double>>& treatment_series,
    TreatmentKind treatment_kind,
    const std::vector<std::string>& major_crops,
    std::ostream* diag = nullptr);

// Crops ranked by period-mean abundance across all records, descending;
// the dominant crop types are the ones worth controlling for.
std::vector<std::string> select_major_crops(const PanelDataset& panel,
                                            std::size_t count);

// Cross-section CSV: cell_id, centroid_lon, centroid_lat, <features...>,
// treatment_raw, treated, outcome [, extras]. Unknown columns other than
// the declared extras are treated as features; `true_cate` is always
// ignored on read.
void write_cross_section(
    const std::string& path, const CrossSectionTable& table,
    const std::vector<std::pair<std::string, std::vector<double>>>& extras = {});

CrossSectionTable read_cross_section(const std::string& path);

} // namespace agrisuit::data

#endif
