#include "agrisuit/data_model.hpp"

#include "agrisuit/io/csv.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

namespace agrisuit::data {

namespace {

constexpr double kAbundanceSumSlack = 1e-9;

struct Diagnostic {
    std::size_t row; // file line number, header = 1
    std::string code;
    std::string detail;
};

void emit(std::ostream* diag, const std::vector<Diagnostic>& diagnostics) {
    if (diag == nullptr) {
        diag = &std::cerr;
    }
    for (const auto& d : diagnostics) {
        *diag << "row=" << d.row << " code=" << d.code << " detail=" << d.detail
              << '\n';
    }
}

} // namespace

const GridCell* PanelDataset::find_cell(const std::string& cell_id) const {
    for (const auto& cell : cells) {
        if (cell.cell_id == cell_id) {
            return &cell;
        }
    }
    return nullptr;
}

PanelDataset load_panel(const std::string& path, const PanelSchema& schema,
                        std::ostream* diag) {
    io::CsvTable csv = io::read_csv(path);

    auto require_column = [&](const std::string& name) {
        auto idx = csv.column(name);
        if (!idx) {
            throw DataError("MissingColumn", "column '" + name + "' not in " + path);
        }
        return *idx;
    };

    std::size_t cell_col = require_column(schema.cell_id_column);
    std::size_t year_col = require_column(schema.year_column);
    std::size_t outcome_col = require_column(schema.outcome_column);
    std::vector<std::size_t> abundance_cols, environment_cols;
    for (const auto& name : schema.abundance_columns) {
        abundance_cols.push_back(require_column(name));
    }
    for (const auto& name : schema.environment_columns) {
        environment_cols.push_back(require_column(name));
    }
    std::optional<std::size_t> lon_col, lat_col;
    if (schema.lon_column) {
        lon_col = require_column(*schema.lon_column);
    }
    if (schema.lat_column) {
        lat_col = require_column(*schema.lat_column);
    }

    PanelDataset panel;
    std::vector<Diagnostic> diagnostics;
    std::set<std::pair<std::string, int>> seen;
    std::set<int> years;
    std::map<std::string, std::size_t> cell_index;

    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        std::size_t line = r + 2;
        if (row.size() != csv.header.size()) {
            diagnostics.push_back({line, "MalformedNumber",
                                   "expected " + std::to_string(csv.header.size()) +
                                       " fields, got " + std::to_string(row.size())});
            continue;
        }
        PanelRecord record;
        record.cell_id = row[cell_col];
        if (record.cell_id.empty()) {
            diagnostics.push_back({line, "MalformedNumber", "empty cell_id"});
            continue;
        }
        auto year = io::parse_integer(row[year_col]);
        if (!year) {
            diagnostics.push_back(
                {line, "MalformedNumber", "year '" + row[year_col] + "'"});
            continue;
        }
        record.year = static_cast<int>(*year);
        if ((schema.year_min && record.year < *schema.year_min) ||
            (schema.year_max && record.year > *schema.year_max)) {
            diagnostics.push_back({line, "MalformedNumber",
                                   "year " + std::to_string(record.year) +
                                       " outside the study period"});
            continue;
        }

        bool row_ok = true;
        double abundance_sum = 0.0;
        for (std::size_t j = 0; j < abundance_cols.size(); ++j) {
            auto value = io::parse_number(row[abundance_cols[j]]);
            if (!value || *value < 0.0 || *value > 1.0) {
                diagnostics.push_back({line, "MalformedNumber",
                                       "abundance '" +
                                           row[abundance_cols[j]] + "' in column " +
                                           schema.abundance_columns[j]});
                row_ok = false;
                break;
            }
            abundance_sum += *value;
            record.abundances[schema.abundance_columns[j]] = *value;
        }
        if (!row_ok) {
            continue;
        }
        if (abundance_sum > 1.0 + kAbundanceSumSlack) {
            diagnostics.push_back({line, "MalformedNumber",
                                   "abundances sum to " +
                                       format_double(abundance_sum)});
            continue;
        }
        for (std::size_t j = 0; j < environment_cols.size(); ++j) {
            auto value = io::parse_number(row[environment_cols[j]]);
            if (!value) {
                diagnostics.push_back({line, "MalformedNumber",
                                       "environment '" +
                                           row[environment_cols[j]] +
                                           "' in column " +
                                           schema.environment_columns[j]});
                row_ok = false;
                break;
            }
            record.environment[schema.environment_columns[j]] = *value;
        }
        if (!row_ok) {
            continue;
        }
        if (!row[outcome_col].empty()) {
            auto value = io::parse_number(row[outcome_col]);
            if (!value) {
                diagnostics.push_back({line, "MalformedNumber",
                                       "outcome '" + row[outcome_col] + "'"});
                continue;
            }
            record.outcome = *value;
        }

        auto key = std::make_pair(record.cell_id, record.year);
        if (!seen.insert(key).second) {
            diagnostics.push_back({line, "DuplicateRecord",
                                   "cell " + record.cell_id + " year " +
                                       std::to_string(record.year)});
            continue;
        }

        if (cell_index.find(record.cell_id) == cell_index.end()) {
            GridCell cell;
            cell.cell_id = record.cell_id;
            cell.cell_size_m = schema.cell_size_m;
            if (lon_col) {
                auto lon = io::parse_number(row[*lon_col]);
                if (!lon) {
                    diagnostics.push_back(
                        {line, "MalformedNumber", "lon '" + row[*lon_col] + "'"});
                    continue;
                }
                cell.centroid_lon = *lon;
            }
            if (lat_col) {
                auto lat = io::parse_number(row[*lat_col]);
                if (!lat) {
                    diagnostics.push_back(
                        {line, "MalformedNumber", "lat '" + row[*lat_col] + "'"});
                    continue;
                }
                cell.centroid_lat = *lat;
            }
            cell_index[record.cell_id] = panel.cells.size();
            panel.cells.push_back(std::move(cell));
        }
        years.insert(record.year);
        panel.records.push_back(std::move(record));
    }

    if (!diagnostics.empty()) {
        emit(diag, diagnostics);
        throw DataError(diagnostics.front().code,
                        std::to_string(diagnostics.size()) +
                            " invalid row(s) in " + path + "; first at row " +
                            std::to_string(diagnostics.front().row) + ": " +
                            diagnostics.front().detail);
    }
    if (panel.records.empty()) {
        throw DataError("EmptyResult", "no records in " + path);
    }
    panel.study_years.assign(years.begin(), years.end());
    return panel;
}

PanelDataset filter_cropland(const PanelDataset& panel, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ConfigError("InvalidSpec", "cropland threshold must be in [0,1]");
    }
    std::map<std::string, std::pair<double, int>> totals; // sum, count
    for (const auto& record : panel.records) {
        double total = 0.0;
        for (const auto& [crop, fraction] : record.abundances) {
            total += fraction;
        }
        auto& entry = totals[record.cell_id];
        entry.first += total;
        entry.second += 1;
    }

    std::set<std::string> retained;
    for (const auto& [cell_id, entry] : totals) {
        if (entry.first / entry.second >= threshold) {
            retained.insert(cell_id);
        }
    }
    if (retained.empty()) {
        throw DataError("EmptyResult", "no cell meets the cropland threshold of " +
                                           format_double(threshold));
    }

    PanelDataset filtered;
    filtered.study_years = panel.study_years;
    for (const auto& cell : panel.cells) {
        if (retained.count(cell.cell_id) > 0) {
            filtered.cells.push_back(cell);
        }
    }
    for (const auto& record : panel.records) {
        if (retained.count(record.cell_id) > 0) {
            filtered.records.push_back(record);
        }
    }
    return filtered;
}

Matrix CrossSectionTable::features() const {
    Matrix X(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(feature_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = rows[i].x.transpose();
    }
    return X;
}

Vector CrossSectionTable::outcomes() const {
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y[static_cast<Eigen::Index>(i)] = rows[i].y;
    }
    return y;
}

Vector CrossSectionTable::treatments() const {
    Vector t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].treated < 0) {
            throw DataError("InvalidSpec",
                            "treatment not yet binarized for cell " +
                                rows[i].cell_id);
        }
        t[static_cast<Eigen::Index>(i)] = rows[i].treated;
    }
    return t;
}

Vector CrossSectionTable::treatment_raws() const {
    Vector t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t[static_cast<Eigen::Index>(i)] = rows[i].treatment_raw;
    }
    return t;
}

CrossSectionTable aggregate_temporal(
    const PanelDataset& panel,
    const std::map<std::string, std::vector<double>>& treatment_series,
    TreatmentKind treatment_kind, const std::vector<std::string>& major_crops,
    std::ostream* diag) {
    // group records per cell, keeping panel cell order
    std::map<std::string, std::vector<const PanelRecord*>> grouped;
    for (const auto& record : panel.records) {
        grouped[record.cell_id].push_back(&record);
    }

    // feature names: environment (sorted by map key) then major-crop
    // abundances in the caller's order
    std::set<std::string> env_names;
    for (const auto& record : panel.records) {
        for (const auto& [name, value] : record.environment) {
            env_names.insert(name);
        }
    }

    CrossSectionTable table;
    table.feature_names.assign(env_names.begin(), env_names.end());
    for (const auto& crop : major_crops) {
        table.feature_names.push_back(crop + "_abundance");
    }

    std::ostream* sink = diag == nullptr ? &std::cerr : diag;
    for (const auto& cell : panel.cells) {
        auto it = grouped.find(cell.cell_id);
        std::size_t n_years = it == grouped.end() ? 0 : it->second.size();
        if (n_years < 2) {
            throw DataError("InconsistentYears",
                            "cell " + cell.cell_id + " has " +
                                std::to_string(n_years) +
                                " yearly record(s); need at least 2");
        }
        const auto& records = it->second;
        bool missing_outcome = false;
        for (const auto* record : records) {
            if (!record->outcome) {
                missing_outcome = true;
                break;
            }
        }
        if (missing_outcome) {
            *sink << "cell=" << cell.cell_id
                  << " code=MissingOutcome detail=dropped, outcome absent for"
                  << " at least one year\n";
            continue;
        }
        auto series = treatment_series.find(cell.cell_id);
        if (series == treatment_series.end() || series->second.empty()) {
            throw DataError("MissingTreatmentSeries",
                            "no treatment series for cell " + cell.cell_id);
        }

        CrossSectionRow row;
        row.cell_id = cell.cell_id;
        row.centroid_lon = cell.centroid_lon;
        row.centroid_lat = cell.centroid_lat;
        row.x = Vector::Zero(static_cast<Eigen::Index>(table.feature_names.size()));
        double y_sum = 0.0;
        for (const auto* record : records) {
            Eigen::Index j = 0;
            for (const auto& name : env_names) {
                auto found = record->environment.find(name);
                if (found == record->environment.end()) {
                    throw DataError("MissingColumn",
                                    "cell " + cell.cell_id + " year " +
                                        std::to_string(record->year) +
                                        " lacks environment feature " + name);
                }
                row.x[j++] += found->second;
            }
            for (const auto& crop : major_crops) {
                auto found = record->abundances.find(crop);
                row.x[j++] += found == record->abundances.end() ? 0.0 : found->second;
            }
            y_sum += *record->outcome;
        }
        row.x /= static_cast<double>(n_years);
        row.y = y_sum / static_cast<double>(n_years);

        double acc = 0.0;
        for (double v : series->second) {
            acc += v;
        }
        row.treatment_raw = treatment_kind == TreatmentKind::sum
                                ? acc
                                : acc / static_cast<double>(series->second.size());
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw DataError("EmptyResult", "temporal aggregation produced no rows");
    }
    return table;
}

std::vector<std::string> select_major_crops(const PanelDataset& panel,
                                            std::size_t count) {
    std::map<std::string, double> sums;
    for (const auto& record : panel.records) {
        for (const auto& [crop, fraction] : record.abundances) {
            sums[crop] += fraction;
        }
    }
    std::vector<std::pair<std::string, double>> ranked(sums.begin(), sums.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    std::vector<std::string> crops;
    for (std::size_t i = 0; i < ranked.size() && i < count; ++i) {
        crops.push_back(ranked[i].first);
    }
    return crops;
}

void write_cross_section(
    const std::string& path, const CrossSectionTable& table,
    const std::vector<std::pair<std::string, std::vector<double>>>& extras) {
    io::CsvTable csv;
    csv.header = {"cell_id", "centroid_lon", "centroid_lat"};
    for (const auto& name : table.feature_names) {
        csv.header.push_back(name);
    }
    csv.header.insert(csv.header.end(), {"treatment_raw", "treated", "outcome"});
    for (const auto& [name, values] : extras) {
        if (values.size() != table.rows.size()) {
            throw DataError("DimensionMismatch",
                            "extra column " + name + " has wrong length");
        }
        csv.header.push_back(name);
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        std::vector<std::string> cells;
        cells.push_back(row.cell_id);
        cells.push_back(format_double(row.centroid_lon));
        cells.push_back(format_double(row.centroid_lat));
        for (Eigen::Index j = 0; j < row.x.size(); ++j) {
            cells.push_back(format_double(row.x[j]));
        }
        cells.push_back(format_double(row.treatment_raw));
        cells.push_back(row.treated < 0 ? "" : std::to_string(row.treated));
        cells.push_back(format_double(row.y));
        for (const auto& [name, values] : extras) {
            cells.push_back(format_double(values[i]));
        }
        csv.rows.push_back(std::move(cells));
    }
    io::write_csv(path, csv);
}

CrossSectionTable read_cross_section(const std::string& path) {
    io::CsvTable csv = io::read_csv(path);
    auto col = [&](const std::string& name) {
        auto idx = csv.column(name);
        if (!idx) {
            throw DataError("MissingColumn",
                            "column '" + name + "' not in " + path);
        }
        return *idx;
    };
    std::size_t id_col = col("cell_id");
    std::size_t lon_col = col("centroid_lon");
    std::size_t lat_col = col("centroid_lat");
    std::size_t raw_col = col("treatment_raw");
    std::size_t treated_col = col("treated");
    std::size_t outcome_col = col("outcome");

    CrossSectionTable table;
    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
        const std::string& name = csv.header[j];
        if (j == id_col || j == lon_col || j == lat_col || j == raw_col ||
            j == treated_col || j == outcome_col || name == "true_cate") {
            continue;
        }
        feature_cols.push_back(j);
        table.feature_names.push_back(name);
    }

    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& cells = csv.rows[r];
        if (cells.size() != csv.header.size()) {
            throw DataError("MalformedNumber",
                            "row " + std::to_string(r + 2) + " has " +
                                std::to_string(cells.size()) + " fields");
        }
        CrossSectionRow row;
        row.cell_id = cells[id_col];
        auto number = [&](std::size_t j) {
            auto value = io::parse_number(cells[j]);
            if (!value) {
                throw DataError("MalformedNumber",
                                "row " + std::to_string(r + 2) + " column " +
                                    csv.header[j] + ": '" + cells[j] + "'");
            }
            return *value;
        };
        row.centroid_lon = number(lon_col);
        row.centroid_lat = number(lat_col);
        row.treatment_raw = number(raw_col);
        row.treated = cells[treated_col].empty()
                          ? -1
                          : static_cast<int>(number(treated_col));
        row.y = number(outcome_col);
        row.x = Vector(static_cast<Eigen::Index>(feature_cols.size()));
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            row.x[static_cast<Eigen::Index>(j)] = number(feature_cols[j]);
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw DataError("EmptyResult", "no rows in " + path);
    }
    return table;
}

} // namespace agrisuit::data
