#include "agrisuit/practices.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace agrisuit::practices {

std::map<std::string, std::map<std::string, double>> grid_abundances(
    const std::vector<Parcel>& parcels, const std::vector<data::GridCell>& grid,
    int year) {
    for (const auto& parcel : parcels) {
        if (parcel.year != year) {
            continue;
        }
        if (parcel.polygon.size() < 3) {
            throw DataError("DegeneratePolygon",
                            "parcel " + parcel.parcel_id + " has fewer than 3 vertices");
        }
        if (!geometry::is_simple(parcel.polygon)) {
            throw DataError("NonSimplePolygon",
                            "parcel " + parcel.parcel_id + " self-intersects");
        }
        if (geometry::polygon_area(parcel.polygon) <= 0.0) {
            throw DataError("DegeneratePolygon",
                            "parcel " + parcel.parcel_id + " has zero area");
        }
    }

    std::map<std::string, std::map<std::string, double>> abundances;
    for (const auto& cell : grid) {
        double half = 0.5 * cell.cell_size_m;
        geometry::Rect rect{cell.centroid_lon - half, cell.centroid_lat - half,
                            cell.centroid_lon + half, cell.centroid_lat + half};
        double cell_area = rect.area();
        std::map<std::string, double> shares;
        for (const auto& parcel : parcels) {
            if (parcel.year != year) {
                continue;
            }
            double overlap = geometry::rect_intersection_area(parcel.polygon, rect);
            if (overlap > 0.0) {
                shares[parcel.crop] += overlap / cell_area;
            }
        }
        abundances[cell.cell_id] = std::move(shares);
    }
    return abundances;
}

double shannon_diversity(const std::map<std::string, double>& abundances) {
    double total = 0.0;
    for (const auto& [crop, value] : abundances) {
        if (value < 0.0) {
            throw DataError("MalformedNumber",
                            "negative abundance for crop " + crop);
        }
        total += value;
    }
    if (total <= 0.0) {
        throw DataError("AllZero", "every abundance is zero");
    }
    double h = 0.0;
    for (const auto& [crop, value] : abundances) {
        if (value > 0.0) {
            double p = value / total;
            h -= p * std::log(p);
        }
    }
    return std::max(h, 0.0);
}

double crop_rotation(const std::vector<std::map<std::string, double>>& series) {
    if (series.size() < 2) {
        throw DataError("TooFewYears", "crop rotation needs at least 2 years");
    }
    std::set<std::string> crops;
    for (const auto& year : series) {
        for (const auto& [crop, value] : year) {
            crops.insert(crop);
        }
    }
    auto value_of = [](const std::map<std::string, double>& year,
                       const std::string& crop) {
        auto it = year.find(crop);
        return it == year.end() ? 0.0 : it->second;
    };
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < series.size(); ++t) {
        for (const auto& crop : crops) {
            total += std::abs(value_of(series[t + 1], crop) -
                              value_of(series[t], crop));
        }
    }
    return total;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw DataError("EmptyData", "median of empty list");
    }
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<TreatmentAssignment> binarize_treatment(
    const std::vector<std::string>& cell_ids,
    const std::vector<double>& values) {
    if (cell_ids.size() != values.size()) {
        throw DataError("DimensionMismatch", "cell ids and values differ in length");
    }
    if (values.size() < 2) {
        throw DataError("EmptyData", "binarization needs at least 2 values");
    }
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
        throw DataError("ConstantTreatment",
                        "all treatment values equal " + format_double(lo));
    }
    double m = median(values);
    std::vector<TreatmentAssignment> assignments;
    assignments.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        // ties at the median go to control
        assignments.push_back({cell_ids[i], values[i], values[i] > m ? 1 : 0});
    }
    return assignments;
}

void binarize_treatment(data::CrossSectionTable& table) {
    std::vector<std::string> ids;
    std::vector<double> values;
    ids.reserve(table.rows.size());
    values.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ids.push_back(row.cell_id);
        values.push_back(row.treatment_raw);
    }
    auto assignments = binarize_treatment(ids, values);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        table.rows[i].treated = assignments[i].treated;
    }
}

Treatment treatment_from_name(const std::string& name) {
    if (name == "cr" || name == "crop_rotation") {
        return Treatment::crop_rotation;
    }
    if (name == "lcd" || name == "landscape_crop_diversity") {
        return Treatment::landscape_crop_diversity;
    }
    throw ConfigError("InvalidSpec", "unknown treatment: " + name);
}

std::string treatment_name(Treatment treatment) {
    return treatment == Treatment::crop_rotation ? "crop_rotation"
                                                 : "landscape_crop_diversity";
}

data::TreatmentKind aggregation_kind(Treatment treatment) {
    // total rotations over the period vs mean diversity over years
    return treatment == Treatment::crop_rotation ? data::TreatmentKind::sum
                                                 : data::TreatmentKind::mean;
}

std::vector<PracticeRecord> compute_practice_records(
    const data::PanelDataset& panel) {
    std::map<std::string, std::vector<const data::PanelRecord*>> grouped;
    for (const auto& record : panel.records) {
        grouped[record.cell_id].push_back(&record);
    }
    std::vector<PracticeRecord> out;
    for (const auto& cell : panel.cells) {
        auto it = grouped.find(cell.cell_id);
        if (it == grouped.end()) {
            continue;
        }
        auto records = it->second;
        std::sort(records.begin(), records.end(),
                  [](const auto* a, const auto* b) { return a->year < b->year; });
        const data::PanelRecord* previous = nullptr;
        for (const auto* record : records) {
            PracticeRecord practice;
            practice.cell_id = cell.cell_id;
            practice.year = record->year;
            double total = 0.0;
            for (const auto& [crop, value] : record->abundances) {
                total += value;
            }
            practice.shannon_H = total > 0.0 ? shannon_diversity(record->abundances) : 0.0;
            if (previous != nullptr) {
                practice.rotation_delta =
                    crop_rotation({previous->abundances, record->abundances});
            }
            out.push_back(practice);
            previous = record;
        }
    }
    return out;
}

std::map<std::string, std::vector<double>> treatment_series(
    const data::PanelDataset& panel, Treatment treatment) {
    auto records = compute_practice_records(panel);
    std::map<std::string, std::vector<double>> series;
    for (const auto& record : records) {
        bool first_year = series.find(record.cell_id) == series.end();
        if (treatment == Treatment::landscape_crop_diversity) {
            series[record.cell_id].push_back(record.shannon_H);
        } else if (!first_year) {
            series[record.cell_id].push_back(record.rotation_delta);
        } else {
            series[record.cell_id]; // ensure the cell appears even pre-pair
        }
    }
    return series;
}

} // namespace agrisuit::practices
