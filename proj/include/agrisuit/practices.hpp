#ifndef AGRISUIT_PRACTICES_HPP
#define AGRISUIT_PRACTICES_HPP

#include "agrisuit/data_model.hpp"
#include "agrisuit/geometry.hpp"

#include <map>
#include <string>
#include <vector>

namespace agrisuit::practices {

// A declared field: simple polygon in a planar CRS, one crop per year.
struct Parcel {
    std::string parcel_id;
    geometry::Ring polygon;
    std::string crop;
    int year = 0;
};

// Per-cell, per-year practice metrics. rotation_delta is the year-pair
// rotation contribution attributed to the later year (0 for a cell's first
// year).
struct PracticeRecord {
    std::string cell_id;
    int year = 0;
    double shannon_H = 0.0;      // nats
    double rotation_delta = 0.0; // <= 2 per year pair
};

struct TreatmentAssignment {
    std::string cell_id;
    double treatment_raw = 0.0;
    int treated = 0; // 1 iff treatment_raw > population median (strict)
};

// Area fraction of each crop per grid cell for one year:
// abundance(crop) = area(parcels of that crop ∩ cell) / cell area.
// Cells are axis-aligned squares of cell_size_m around their centroid.
std::map<std::string, std::map<std::string, double>> grid_abundances(
    const std::vector<Parcel>& parcels, const std::vector<data::GridCell>& grid,
    int year);

// Shannon diversity H' = -Σ p ln p over crops with positive share, with
// shares renormalized to proportions. Returns 0 when at most one crop is
// present; AllZero when every abundance is 0.
double shannon_diversity(const std::map<std::string, double>& abundances);

// Σ over consecutive year pairs of Σ_crop |abundance_{t+1} - abundance_t|,
// on the union of crop keys (missing crops read as 0).
double crop_rotation(const std::vector<std::map<std::string, double>>& series);

double median(std::vector<double> values);

std::vector<TreatmentAssignment> binarize_treatment(
    const std::vector<std::string>& cell_ids, const std::vector<double>& values);

// Sets `treated` on every row from the strict-median rule.
void binarize_treatment(data::CrossSectionTable& table);

enum class Treatment { crop_rotation, landscape_crop_diversity };

Treatment treatment_from_name(const std::string& name);
std::string treatment_name(Treatment treatment);
data::TreatmentKind aggregation_kind(Treatment treatment);

// Per-cell yearly metrics from the panel's abundance maps. An all-zero
// abundance year contributes H' = 0 rather than an error.
std::vector<PracticeRecord> compute_practice_records(const data::PanelDataset& panel);

// Treatment series per cell: Shannon H' per year (diversity) or per-pair
// rotation deltas (rotation, one value per adjacent year pair).
std::map<std::string, std::vector<double>> treatment_series(
    const data::PanelDataset& panel, Treatment treatment);

} // namespace agrisuit::practices

#endif
