#include "agrisuit/analysis.hpp"

#include "agrisuit/io/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace agrisuit::analysis {

namespace {

Vector mid_ranks(const Vector& values) {
    const Eigen::Index n = values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return values[a] < values[b];
    });
    Vector ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        double average = 0.5 * (i + j) + 1.0; // 1-based mid-rank of the tie run
        for (Eigen::Index k = i; k <= j; ++k) {
            ranks[order[k]] = average;
        }
        i = j + 1;
    }
    return ranks;
}

double pearson(const Vector& a, const Vector& b) {
    double mean_a = a.mean();
    double mean_b = b.mean();
    Vector da = a.array() - mean_a;
    Vector db = b.array() - mean_b;
    double var_a = da.squaredNorm();
    double var_b = db.squaredNorm();
    if (var_a <= 0.0 || var_b <= 0.0) {
        throw DataError("ConstantInput", "correlation of a constant vector");
    }
    return da.dot(db) / std::sqrt(var_a * var_b);
}

} // namespace

double spearman(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DataError("DimensionMismatch", "spearman inputs differ in length");
    }
    if (a.size() < 3) {
        throw DataError("EmptyData", "spearman needs at least 3 pairs");
    }
    return pearson(mid_ranks(a), mid_ranks(b));
}

Histogram cate_histogram(const Vector& cates, int bins) {
    if (cates.size() == 0) {
        throw DataError("EmptyData", "histogram of an empty sample");
    }
    if (bins < 1) {
        throw ConfigError("InvalidSpec", "bins must be >= 1");
    }
    double lo = cates.minCoeff();
    double hi = cates.maxCoeff();
    Histogram out;
    out.edges.resize(static_cast<std::size_t>(bins) + 1);
    out.counts.assign(static_cast<std::size_t>(bins), 0);
    double width = (hi - lo) / bins;
    for (int k = 0; k <= bins; ++k) {
        out.edges[static_cast<std::size_t>(k)] = lo + width * k;
    }
    out.edges.back() = hi;
    for (Eigen::Index i = 0; i < cates.size(); ++i) {
        int bin = 0;
        if (width > 0.0) {
            bin = std::min(bins - 1,
                           static_cast<int>((cates[i] - lo) / width));
        }
        out.counts[static_cast<std::size_t>(bin)] += 1;
    }
    return out;
}

SuitabilityMap build_suitability_map(const data::CrossSectionTable& table,
                                     const Vector& cates) {
    if (static_cast<std::size_t>(cates.size()) != table.rows.size()) {
        throw DataError("DimensionMismatch", "cates must be parallel to rows");
    }
    SuitabilityMap map;
    map.rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        double cate = cates[static_cast<Eigen::Index>(i)];
        if (!std::isfinite(cate)) {
            throw EstimationError("DegenerateResiduals",
                                  "non-finite CATE for cell " + row.cell_id);
        }
        map.rows.push_back({row.cell_id, row.centroid_lon, row.centroid_lat,
                            cate, row.treated, row.treatment_raw});
    }
    std::sort(map.rows.begin(), map.rows.end(),
              [](const SuitabilityRow& a, const SuitabilityRow& b) {
                  return a.cell_id < b.cell_id;
              });
    return map;
}

void write_map_csv(const std::string& path, const SuitabilityMap& map) {
    io::CsvTable csv;
    csv.header = {"cell_id", "centroid_lon", "centroid_lat",
                  "cate",    "treated",      "treatment_raw"};
    for (const auto& row : map.rows) {
        csv.rows.push_back({row.cell_id, format_double(row.centroid_lon),
                            format_double(row.centroid_lat),
                            format_double(row.cate), std::to_string(row.treated),
                            format_double(row.treatment_raw)});
    }
    io::write_csv(path, csv);
}

namespace {

std::string json_escape(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
            out.push_back(c);
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

} // namespace

void write_map_geojson(const std::string& path, const SuitabilityMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("MissingArtifact", "cannot open " + path);
    }
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    for (std::size_t i = 0; i < map.rows.size(); ++i) {
        const auto& row = map.rows[i];
        if (i > 0) {
            out << ",";
        }
        out << "{\"type\":\"Feature\",\"geometry\":{\"type\":\"Point\","
            << "\"coordinates\":[" << format_double(row.centroid_lon) << ","
            << format_double(row.centroid_lat) << "]},\"properties\":{"
            << "\"cell_id\":\"" << json_escape(row.cell_id) << "\",\"cate\":"
            << format_double(row.cate) << ",\"treated\":" << row.treated
            << ",\"treatment_raw\":" << format_double(row.treatment_raw) << "}}";
    }
    out << "]}\n";
}

ShiftResult counterfactual_shift(const dml::CateModel& model, const Matrix& X,
                                 const ShiftSpec& shift) {
    if (static_cast<std::size_t>(X.cols()) != model.feature_names.size()) {
        throw DataError("DimensionMismatch", "X does not match the model features");
    }
    Matrix shifted = X;
    for (const auto& [name, delta] : shift.deltas) {
        auto it = std::find(model.feature_names.begin(),
                            model.feature_names.end(), name);
        if (it == model.feature_names.end()) {
            throw DataError("UnknownFeature",
                            "shift names unknown feature '" + name + "'");
        }
        Eigen::Index j = it - model.feature_names.begin();
        shifted.col(j).array() += delta;
    }

    ShiftResult out;
    out.shifted_cates = model.predict(shifted);
    out.extrapolated.assign(static_cast<std::size_t>(X.rows()), false);
    long flagged = 0;
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) {
        bool outside = false;
        for (Eigen::Index j = 0; j < shifted.cols(); ++j) {
            if (shifted(i, j) < model.feature_min[j] ||
                shifted(i, j) > model.feature_max[j]) {
                outside = true;
                break;
            }
        }
        out.extrapolated[static_cast<std::size_t>(i)] = outside;
        flagged += outside ? 1 : 0;
    }
    out.flagged_fraction =
        static_cast<double>(flagged) / static_cast<double>(X.rows());
    out.threshold_exceeded = out.flagged_fraction > shift.extrapolation_threshold;
    return out;
}

std::vector<std::pair<std::string, double>> spearman_table(
    const Matrix& X, const std::vector<std::string>& feature_names,
    const Vector& cates) {
    std::vector<std::pair<std::string, double>> table;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double rho;
        try {
            rho = spearman(X.col(j), cates);
        } catch (const DataError&) {
            rho = std::numeric_limits<double>::quiet_NaN();
        }
        table.emplace_back(feature_names[static_cast<std::size_t>(j)], rho);
    }
    return table;
}

void write_cate_by_feature(const std::string& path,
                           const data::CrossSectionTable& table,
                           const Vector& cates) {
    if (static_cast<std::size_t>(cates.size()) != table.rows.size()) {
        throw DataError("DimensionMismatch", "cates must be parallel to rows");
    }
    io::CsvTable csv;
    csv.header.push_back("cell_id");
    for (const auto& name : table.feature_names) {
        csv.header.push_back(name);
    }
    csv.header.push_back("cate");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        std::vector<std::string> cells;
        cells.push_back(table.rows[i].cell_id);
        for (Eigen::Index j = 0; j < table.rows[i].x.size(); ++j) {
            cells.push_back(format_double(table.rows[i].x[j]));
        }
        cells.push_back(format_double(cates[static_cast<Eigen::Index>(i)]));
        csv.rows.push_back(std::move(cells));
    }
    io::write_csv(path, csv);
}

void write_histogram_csv(const std::string& path, const Histogram& histogram) {
    io::CsvTable csv;
    csv.header = {"bin_low", "bin_high", "count"};
    for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
        csv.rows.push_back({format_double(histogram.edges[k]),
                            format_double(histogram.edges[k + 1]),
                            std::to_string(histogram.counts[k])});
    }
    io::write_csv(path, csv);
}

std::vector<double> cate_quantiles(const Vector& cates) {
    std::vector<double> sorted(cates.data(), cates.data() + cates.size());
    std::sort(sorted.begin(), sorted.end());
    auto at = [&](double q) {
        double pos = q * (static_cast<double>(sorted.size()) - 1.0);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    return {sorted.front(), at(0.05), at(0.25), at(0.5),
            at(0.75),       at(0.95), sorted.back()};
}

} // namespace agrisuit::analysis
