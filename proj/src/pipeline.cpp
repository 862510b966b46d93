#include "agrisuit/pipeline.hpp"

#include "agrisuit/io/csv.hpp"
#include "agrisuit/io/geojson.hpp"
#include "agrisuit/io/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace agrisuit::pipeline {

namespace fs = std::filesystem;
using io::json;

RunConfig::RunConfig() {
    propensity_model.family = learners::ModelFamily::gradient_boosting_classifier;
    propensity_model.grid = {
        {"n_stages", {100}}, {"learning_rate", {0.1}}, {"max_depth", {3}}};
    propensity_model.scoring = learners::Scoring::f1;
}

std::uint64_t RunConfig::require_seed() const {
    if (!seed) {
        throw ConfigError("InvalidSpec", "a seed is mandatory (--seed or config)");
    }
    return *seed;
}

std::string RunConfig::resolved_cross_section() const {
    if (!cross_section_path.empty()) {
        return cross_section_path;
    }
    return (fs::path(out_dir) / "cross_section.csv").string();
}

namespace {

json grid_to_json(const learners::ParamGrid& grid) {
    json out = json::object();
    for (const auto& [name, values] : grid) {
        out[name] = values;
    }
    return out;
}

learners::ParamGrid grid_from_json(const json& j) {
    learners::ParamGrid grid;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::vector<double> values;
        if (it.value().is_array()) {
            for (const auto& v : it.value()) {
                values.push_back(v.get<double>());
            }
        } else {
            values.push_back(it.value().get<double>());
        }
        grid.emplace_back(it.key(), std::move(values));
    }
    return grid;
}

json search_to_json(const learners::SearchSpec& spec) {
    return json{{"family", learners::family_name(spec.family)},
                {"scoring", spec.scoring == learners::Scoring::r2 ? "r2" : "f1"},
                {"k_folds", spec.k_folds},
                {"grid", grid_to_json(spec.grid)}};
}

learners::SearchSpec search_from_json(const json& j,
                                      const learners::SearchSpec& fallback) {
    learners::SearchSpec spec = fallback;
    if (j.contains("family")) {
        spec.family = learners::family_from_name(j["family"].get<std::string>());
        // refresh the default grid when only the family was switched
        spec.grid = learners::default_search(spec.family).grid;
        spec.scoring = learners::default_search(spec.family).scoring;
    }
    if (j.contains("grid")) {
        spec.grid = grid_from_json(j["grid"]);
    }
    if (j.contains("scoring")) {
        spec.scoring = j["scoring"] == "r2" ? learners::Scoring::r2
                                            : learners::Scoring::f1;
    }
    if (j.contains("k_folds")) {
        spec.k_folds = j["k_folds"].get<int>();
    }
    return spec;
}

synthetic::ThetaSpec theta_from_json(const json& j) {
    synthetic::ThetaSpec theta;
    std::string kind = j.value("kind", "constant");
    if (kind == "constant") {
        theta.kind = synthetic::ThetaKind::constant;
        theta.constant_value = j.value("value", 0.0);
    } else if (kind == "linear") {
        theta.kind = synthetic::ThetaKind::linear;
        std::vector<double> coefficients =
            j.value("coefficients", std::vector<double>{});
        theta.linear_coefficients = Vector(static_cast<Eigen::Index>(coefficients.size()));
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
            theta.linear_coefficients[static_cast<Eigen::Index>(i)] = coefficients[i];
        }
        theta.linear_intercept = j.value("intercept", 0.0);
    } else if (kind == "step") {
        theta.kind = synthetic::ThetaKind::step;
        theta.feature = j.value("feature", 0);
        theta.step_threshold = j.value("threshold", 0.0);
        theta.step_low = j.value("low", 0.0);
        theta.step_high = j.value("high", 2.0);
    } else if (kind == "quadratic") {
        theta.kind = synthetic::ThetaKind::quadratic;
        theta.feature = j.value("feature", 0);
        theta.quad_scale = j.value("scale", 1.0);
        theta.quad_center = j.value("center", 0.0);
        theta.quad_offset = j.value("offset", 0.0);
    } else {
        throw ConfigError("InvalidSpec", "unknown theta kind: " + kind);
    }
    return theta;
}

synthetic::FeatureKind feature_kind_from_name(const std::string& name) {
    if (name == "std_normal") return synthetic::FeatureKind::std_normal;
    if (name == "uniform01") return synthetic::FeatureKind::uniform01;
    if (name == "uniform_sym") return synthetic::FeatureKind::uniform_sym;
    throw ConfigError("InvalidSpec", "unknown feature kind: " + name);
}

} // namespace

RunConfig load_config(const std::string& path) {
    json j = io::read_json_file(path);
    RunConfig config;

    if (j.contains("seed")) {
        config.seed = j["seed"].get<std::uint64_t>();
    }
    config.out_dir = j.value("out", config.out_dir);
    config.threads = j.value("threads", config.threads);
    if (j.contains("treatment")) {
        config.treatment =
            practices::treatment_from_name(j["treatment"].get<std::string>());
    }
    config.cropland_threshold =
        j.value("cropland_threshold", config.cropland_threshold);
    if (j.contains("trim")) {
        config.trim_low = j["trim"].value("low", config.trim_low);
        config.trim_high = j["trim"].value("high", config.trim_high);
    }
    config.min_units = j.value("min_units", config.min_units);

    if (j.contains("inputs")) {
        const auto& inputs = j["inputs"];
        config.panel_path = inputs.value("panel", "");
        config.parcels_path = inputs.value("parcels", "");
        config.grid_path = inputs.value("grid", "");
        config.abundances_path = inputs.value("abundances", "");
        config.cross_section_path = inputs.value("cross_section", "");
    }

    if (j.contains("panel_schema")) {
        const auto& js = j["panel_schema"];
        config.schema.cell_id_column = js.value("cell_id", "cell_id");
        config.schema.year_column = js.value("year", "year");
        config.schema.outcome_column = js.value("outcome", "outcome");
        config.schema.abundance_columns =
            js.value("abundance_columns", std::vector<std::string>{});
        config.schema.environment_columns =
            js.value("environment_columns", std::vector<std::string>{});
        if (js.contains("lon")) {
            config.schema.lon_column = js["lon"].get<std::string>();
        }
        if (js.contains("lat")) {
            config.schema.lat_column = js["lat"].get<std::string>();
        }
        config.schema.cell_size_m = js.value("cell_size_m", 500.0);
    }
    if (j.contains("study_period")) {
        config.schema.year_min = j["study_period"][0].get<int>();
        config.schema.year_max = j["study_period"][1].get<int>();
    }
    if (j.contains("major_crops")) {
        if (j["major_crops"].is_array()) {
            config.major_crops = j["major_crops"].get<std::vector<std::string>>();
        } else if (j["major_crops"].is_number()) {
            config.major_crop_count = j["major_crops"].get<std::size_t>();
        }
    }

    if (j.contains("first_stage")) {
        const auto& jf = j["first_stage"];
        config.nuisance.k_folds = jf.value("k_folds", config.nuisance.k_folds);
        config.nuisance.eval_split =
            jf.value("eval_split", config.nuisance.eval_split);
        if (jf.contains("outcome")) {
            config.nuisance.outcome_model =
                search_from_json(jf["outcome"], config.nuisance.outcome_model);
        }
        if (jf.contains("treatment")) {
            config.nuisance.treatment_model =
                search_from_json(jf["treatment"], config.nuisance.treatment_model);
        }
    }
    if (j.contains("propensity")) {
        config.propensity_model =
            search_from_json(j["propensity"], config.propensity_model);
        config.propensity_k_folds =
            j["propensity"].value("k_folds", config.propensity_k_folds);
    }

    if (j.contains("final_stage")) {
        const auto& jf = j["final_stage"];
        std::string kind = jf.value("kind", "causal_forest");
        if (kind == "linear") {
            config.final_stage = dml::CateKind::linear;
        } else if (kind == "causal_forest") {
            config.final_stage = dml::CateKind::causal_forest;
        } else {
            throw ConfigError("InvalidSpec", "unknown final stage: " + kind);
        }
        std::string basis = jf.value("basis", "intercept_only");
        config.linear_basis = basis == "linear_in_x"
                                  ? dml::LinearBasis::linear_in_x
                                  : dml::LinearBasis::intercept_only;
        if (jf.contains("forest")) {
            const auto& jw = jf["forest"];
            config.forest.n_trees = jw.value("n_trees", config.forest.n_trees);
            config.forest.subsample_fraction =
                jw.value("subsample_fraction", config.forest.subsample_fraction);
            config.forest.min_samples_leaf =
                jw.value("min_samples_leaf", config.forest.min_samples_leaf);
            config.forest.max_depth = jw.value("max_depth", config.forest.max_depth);
            config.forest.max_features =
                jw.value("max_features", config.forest.max_features);
        }
    }

    if (j.contains("interpret")) {
        config.interpret_depth = j["interpret"].value("max_depth", 2);
        config.interpret_min_leaf = j["interpret"].value("min_samples_leaf", 1);
    }
    if (j.contains("report")) {
        const auto& jr = j["report"];
        config.histogram_bins = jr.value("histogram_bins", config.histogram_bins);
        if (jr.contains("shift")) {
            const auto& js = jr["shift"];
            if (js.contains("deltas")) {
                for (auto it = js["deltas"].begin(); it != js["deltas"].end(); ++it) {
                    config.shift.deltas.emplace_back(it.key(),
                                                     it.value().get<double>());
                }
            }
            config.shift.extrapolation_threshold = js.value(
                "extrapolation_threshold", config.shift.extrapolation_threshold);
        }
    }

    if (j.contains("synthetic")) {
        const auto& js = j["synthetic"];
        auto& spec = config.synthetic_spec;
        spec.n = js.value("n", spec.n);
        spec.d = js.value("d", spec.d);
        if (js.contains("theta")) {
            spec.theta = theta_from_json(js["theta"]);
        }
        spec.confounding_strength =
            js.value("confounding_strength", spec.confounding_strength);
        spec.outcome_noise = js.value("outcome_noise", spec.outcome_noise);
        spec.assignment_temperature =
            js.value("assignment_temperature", spec.assignment_temperature);
        if (js.contains("feature_kinds")) {
            for (const auto& name : js["feature_kinds"]) {
                spec.feature_kinds.push_back(
                    feature_kind_from_name(name.get<std::string>()));
            }
        }
        if (js.contains("feature_names")) {
            spec.feature_names = js["feature_names"].get<std::vector<std::string>>();
        }
        spec.continuous_treatment =
            js.value("continuous_treatment", spec.continuous_treatment);
        if (js.contains("deterministic_assignment_feature") &&
            !js["deterministic_assignment_feature"].is_null()) {
            spec.deterministic_assignment_feature =
                js["deterministic_assignment_feature"].get<int>();
        }
    }
    return config;
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
    if (overrides.seed) {
        config.seed = *overrides.seed;
    }
    if (overrides.out_dir) {
        config.out_dir = *overrides.out_dir;
    }
    if (overrides.treatment) {
        config.treatment = practices::treatment_from_name(*overrides.treatment);
    }
    if (overrides.threads) {
        config.threads = *overrides.threads;
    }
}

json RunConfig::effective_json() const {
    json j;
    j["seed"] = seed ? json(*seed) : json();
    j["out"] = out_dir;
    j["treatment"] = practices::treatment_name(treatment);
    j["cropland_threshold"] = cropland_threshold;
    j["trim"] = {{"low", trim_low}, {"high", trim_high}};
    j["min_units"] = min_units;
    j["inputs"] = {{"panel", panel_path},
                   {"parcels", parcels_path},
                   {"grid", grid_path},
                   {"abundances", abundances_path},
                   {"cross_section", cross_section_path}};
    j["major_crops"] = major_crops;
    j["major_crop_count"] = major_crop_count;
    j["first_stage"] = {{"k_folds", nuisance.k_folds},
                        {"eval_split", nuisance.eval_split},
                        {"outcome", search_to_json(nuisance.outcome_model)},
                        {"treatment", search_to_json(nuisance.treatment_model)}};
    j["propensity"] = search_to_json(propensity_model);
    j["propensity"]["k_folds"] = propensity_k_folds;
    j["final_stage"] = {
        {"kind", final_stage == dml::CateKind::linear ? "linear" : "causal_forest"},
        {"basis", linear_basis == dml::LinearBasis::intercept_only
                      ? "intercept_only"
                      : "linear_in_x"},
        {"forest",
         {{"n_trees", forest.n_trees},
          {"subsample_fraction", forest.subsample_fraction},
          {"min_samples_leaf", forest.min_samples_leaf},
          {"max_depth", forest.max_depth},
          {"max_features", forest.max_features}}}};
    j["interpret"] = {{"max_depth", interpret_depth},
                      {"min_samples_leaf", interpret_min_leaf}};
    json deltas = json::object();
    for (const auto& [name, delta] : shift.deltas) {
        deltas[name] = delta;
    }
    j["report"] = {{"histogram_bins", histogram_bins},
                   {"shift",
                    {{"deltas", deltas},
                     {"extrapolation_threshold", shift.extrapolation_threshold}}}};
    json theta;
    switch (synthetic_spec.theta.kind) {
    case synthetic::ThetaKind::constant:
        theta = {{"kind", "constant"}, {"value", synthetic_spec.theta.constant_value}};
        break;
    case synthetic::ThetaKind::linear: {
        std::vector<double> coefficients(
            synthetic_spec.theta.linear_coefficients.data(),
            synthetic_spec.theta.linear_coefficients.data() +
                synthetic_spec.theta.linear_coefficients.size());
        theta = {{"kind", "linear"},
                 {"coefficients", coefficients},
                 {"intercept", synthetic_spec.theta.linear_intercept}};
        break;
    }
    case synthetic::ThetaKind::step:
        theta = {{"kind", "step"},
                 {"feature", synthetic_spec.theta.feature},
                 {"threshold", synthetic_spec.theta.step_threshold},
                 {"low", synthetic_spec.theta.step_low},
                 {"high", synthetic_spec.theta.step_high}};
        break;
    case synthetic::ThetaKind::quadratic:
        theta = {{"kind", "quadratic"},
                 {"feature", synthetic_spec.theta.feature},
                 {"scale", synthetic_spec.theta.quad_scale},
                 {"center", synthetic_spec.theta.quad_center},
                 {"offset", synthetic_spec.theta.quad_offset}};
        break;
    }
    j["synthetic"] = {
        {"n", synthetic_spec.n},
        {"d", synthetic_spec.d},
        {"theta", theta},
        {"confounding_strength", synthetic_spec.confounding_strength},
        {"outcome_noise", synthetic_spec.outcome_noise},
        {"assignment_temperature", synthetic_spec.assignment_temperature},
        {"feature_names", synthetic_spec.feature_names},
        {"continuous_treatment", synthetic_spec.continuous_treatment},
        {"deterministic_assignment_feature",
         synthetic_spec.deterministic_assignment_feature
             ? json(*synthetic_spec.deterministic_assignment_feature)
             : json()}};
    return j;
}

namespace {

std::string config_digest(const RunConfig& config) {
    Fnv1a64 hasher;
    hasher.update(config.effective_json().dump());
    return hasher.hex();
}

void write_manifest(const RunConfig& config, const std::string& stage,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths) {
    json inputs = json::object();
    for (const auto& path : input_paths) {
        inputs[fs::path(path).filename().string()] = digest_file(path);
    }
    json outputs = json::object();
    for (const auto& path : output_paths) {
        outputs[fs::path(path).filename().string()] = digest_file(path);
    }
    json manifest{{"format", "agrisuit.manifest"},
                  {"version", 1},
                  {"stage", stage},
                  {"seed", config.require_seed()},
                  {"config_digest", config_digest(config)},
                  {"inputs", inputs},
                  {"outputs", outputs}};
    io::write_json_file(
        (fs::path(config.out_dir) / (stage + "_manifest.json")).string(),
        manifest);
}

std::string out_file(const RunConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& config) {
    fs::create_directories(config.out_dir);
}

data::PanelDataset load_configured_panel(const RunConfig& config) {
    if (config.panel_path.empty()) {
        throw ConfigError("InvalidSpec", "no panel input configured");
    }
    auto panel = data::load_panel(config.panel_path, config.schema);

    // optional long-format abundances merged over the panel's columns
    if (!config.abundances_path.empty()) {
        auto csv = io::read_csv(config.abundances_path);
        auto cell_col = csv.column("cell_id");
        auto year_col = csv.column("year");
        auto crop_col = csv.column("crop");
        auto fraction_col = csv.column("fraction");
        if (!cell_col || !year_col || !crop_col || !fraction_col) {
            throw DataError("MissingColumn",
                            config.abundances_path +
                                " needs cell_id, year, crop, fraction");
        }
        std::map<std::pair<std::string, int>, std::map<std::string, double>> extra;
        for (std::size_t r = 0; r < csv.rows.size(); ++r) {
            const auto& row = csv.rows[r];
            auto year = io::parse_integer(row[*year_col]);
            auto fraction = io::parse_number(row[*fraction_col]);
            if (!year || !fraction) {
                throw DataError("MalformedNumber",
                                config.abundances_path + " row " +
                                    std::to_string(r + 2));
            }
            extra[{row[*cell_col], static_cast<int>(*year)}][row[*crop_col]] =
                *fraction;
        }
        for (auto& record : panel.records) {
            auto it = extra.find({record.cell_id, record.year});
            if (it != extra.end()) {
                for (const auto& [crop, fraction] : it->second) {
                    record.abundances[crop] = fraction;
                }
            }
        }
    }
    return panel;
}

std::vector<data::GridCell> load_grid(const RunConfig& config) {
    auto csv = io::read_csv(config.grid_path);
    auto cell_col = csv.column("cell_id");
    auto lon_col = csv.column("lon");
    auto lat_col = csv.column("lat");
    if (!cell_col || !lon_col || !lat_col) {
        throw DataError("MissingColumn",
                        config.grid_path + " needs cell_id, lon, lat");
    }
    auto size_col = csv.column("cell_size_m");
    std::vector<data::GridCell> grid;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        data::GridCell cell;
        cell.cell_id = row[*cell_col];
        auto lon = io::parse_number(row[*lon_col]);
        auto lat = io::parse_number(row[*lat_col]);
        if (!lon || !lat) {
            throw DataError("MalformedNumber",
                            config.grid_path + " row " + std::to_string(r + 2));
        }
        cell.centroid_lon = *lon;
        cell.centroid_lat = *lat;
        cell.cell_size_m = config.schema.cell_size_m;
        if (size_col) {
            auto size = io::parse_number(row[*size_col]);
            if (size) {
                cell.cell_size_m = *size;
            }
        }
        grid.push_back(std::move(cell));
    }
    if (grid.empty()) {
        throw DataError("EmptyResult", "no grid cells in " + config.grid_path);
    }
    return grid;
}

struct LoadedCrossSection {
    data::CrossSectionTable table;
    Matrix X;
    Vector y;
    Vector t;
};

LoadedCrossSection load_estimation_input(const RunConfig& config) {
    LoadedCrossSection loaded;
    loaded.table = data::read_cross_section(config.resolved_cross_section());
    bool needs_binarization = false;
    for (const auto& row : loaded.table.rows) {
        if (row.treated < 0) {
            needs_binarization = true;
            break;
        }
    }
    if (needs_binarization) {
        practices::binarize_treatment(loaded.table);
    }
    loaded.X = loaded.table.features();
    loaded.y = loaded.table.outcomes();
    loaded.t = loaded.table.treatments();
    return loaded;
}

// rows of the estimation (post-trim) sample, joined from cates.csv
struct EstimationArtifacts {
    data::CrossSectionTable table; // kept rows only
    Vector cates;
};

EstimationArtifacts load_estimation_artifacts(const RunConfig& config) {
    auto full = data::read_cross_section(config.resolved_cross_section());
    auto csv = io::read_csv(out_file(config, "cates.csv"));
    auto id_col = csv.column("cell_id");
    auto cate_col = csv.column("cate");
    if (!id_col || !cate_col) {
        throw DataError("MissingColumn", "cates.csv needs cell_id and cate");
    }
    std::map<std::string, double> by_cell;
    for (const auto& row : csv.rows) {
        auto value = io::parse_number(row[*cate_col]);
        if (!value) {
            throw DataError("MalformedNumber", "bad cate for " + row[*id_col]);
        }
        by_cell[row[*id_col]] = *value;
    }
    EstimationArtifacts artifacts;
    artifacts.table.feature_names = full.feature_names;
    std::vector<double> cates;
    for (const auto& row : full.rows) {
        auto it = by_cell.find(row.cell_id);
        if (it != by_cell.end()) {
            artifacts.table.rows.push_back(row);
            cates.push_back(it->second);
        }
    }
    if (artifacts.table.rows.empty()) {
        throw DataError("MissingArtifact",
                        "no overlap between cates.csv and the cross-section");
    }
    artifacts.cates =
        Eigen::Map<Vector>(cates.data(), static_cast<Eigen::Index>(cates.size()));
    return artifacts;
}

} // namespace

void cmd_simulate(const RunConfig& config) {
    ensure_out_dir(config);
    synthetic::SyntheticSpec spec = config.synthetic_spec;
    spec.seed = config.require_seed();
    auto data = synthetic::generate_plm(spec);

    std::vector<double> true_cate(data.true_cate.data(),
                                  data.true_cate.data() + data.true_cate.size());
    auto path = out_file(config, "cross_section.csv");
    data::write_cross_section(path, data.table, {{"true_cate", true_cate}});
    write_manifest(config, "simulate", {}, {path});
}

void cmd_ingest(const RunConfig& config) {
    ensure_out_dir(config);
    std::vector<std::string> inputs, outputs;

    if (!config.parcels_path.empty()) {
        if (config.grid_path.empty()) {
            throw ConfigError("InvalidSpec", "parcel ingestion needs a grid file");
        }
        auto parcels = io::read_parcels(config.parcels_path);
        auto grid = load_grid(config);
        inputs.push_back(config.parcels_path);
        inputs.push_back(config.grid_path);

        std::set<int> years;
        for (const auto& parcel : parcels) {
            years.insert(parcel.year);
        }
        io::CsvTable csv;
        csv.header = {"cell_id", "year", "crop", "fraction"};
        for (int year : years) {
            auto abundances = practices::grid_abundances(parcels, grid, year);
            for (const auto& [cell_id, shares] : abundances) {
                for (const auto& [crop, fraction] : shares) {
                    csv.rows.push_back({cell_id, std::to_string(year), crop,
                                        format_double(fraction)});
                }
            }
        }
        auto path = out_file(config, "abundances.csv");
        io::write_csv(path, csv);
        outputs.push_back(path);
    }

    if (!config.panel_path.empty()) {
        auto panel = load_configured_panel(config);
        inputs.push_back(config.panel_path);
        if (!config.abundances_path.empty()) {
            inputs.push_back(config.abundances_path);
        }

        auto records = practices::compute_practice_records(panel);
        io::CsvTable csv;
        csv.header = {"cell_id", "year", "shannon_H", "rotation_delta"};
        for (const auto& record : records) {
            csv.rows.push_back({record.cell_id, std::to_string(record.year),
                                format_double(record.shannon_H),
                                format_double(record.rotation_delta)});
        }
        auto path = out_file(config, "practice_records.csv");
        io::write_csv(path, csv);
        outputs.push_back(path);
    }

    if (outputs.empty()) {
        throw ConfigError("InvalidSpec",
                          "ingest needs a panel and/or parcels+grid input");
    }
    write_manifest(config, "ingest", inputs, outputs);
}

void cmd_practices(const RunConfig& config) {
    ensure_out_dir(config);
    auto panel = load_configured_panel(config);
    auto filtered = data::filter_cropland(panel, config.cropland_threshold);

    auto series = practices::treatment_series(filtered, config.treatment);
    auto major = config.major_crops.empty()
                     ? data::select_major_crops(filtered, config.major_crop_count)
                     : config.major_crops;
    auto table = data::aggregate_temporal(
        filtered, series, practices::aggregation_kind(config.treatment), major);
    practices::binarize_treatment(table);

    io::CsvTable treatments;
    treatments.header = {"cell_id", "treatment_raw", "treated"};
    for (const auto& row : table.rows) {
        treatments.rows.push_back({row.cell_id, format_double(row.treatment_raw),
                                   std::to_string(row.treated)});
    }
    auto treatments_path = out_file(config, "treatments.csv");
    io::write_csv(treatments_path, treatments);

    auto cross_section_path = out_file(config, "cross_section.csv");
    data::write_cross_section(cross_section_path, table);
    write_manifest(config, "practices", {config.panel_path},
                   {treatments_path, cross_section_path});
}

void cmd_fit(const RunConfig& config) {
    ensure_out_dir(config);
    auto loaded = load_estimation_input(config);
    std::uint64_t seed = config.require_seed();

    Vector scores = overlap::estimate_propensity(
        loaded.X, loaded.t, config.propensity_model, config.propensity_k_folds,
        derive_seed(seed, 51), effective_threads(config.threads));
    auto report = overlap::trim_overlap(scores, config.trim_low, config.trim_high);

    std::vector<std::string> ids;
    ids.reserve(loaded.table.rows.size());
    for (const auto& row : loaded.table.rows) {
        ids.push_back(row.cell_id);
    }
    auto propensity_path = out_file(config, "propensity.csv");
    overlap::write_propensity_report(propensity_path, ids, report);

    std::vector<Eigen::Index> kept;
    kept.reserve(report.kept_indices.size());
    for (std::size_t idx : report.kept_indices) {
        kept.push_back(static_cast<Eigen::Index>(idx));
    }
    Matrix X_kept = loaded.X(kept, Eigen::all);
    Vector y_kept = loaded.y(kept);
    Vector t_kept = loaded.t(kept);

    dml::DmlOptions options;
    options.final_stage = config.final_stage;
    options.linear_basis = config.linear_basis;
    options.min_units = config.min_units;
    options.threads = effective_threads(config.threads);
    options.forest_spec = std::make_shared<causal::CausalForestSpec>(config.forest);
    auto model = dml::fit_dml(X_kept, y_kept, t_kept, loaded.table.feature_names,
                              config.nuisance, options, seed);

    auto model_path = out_file(config, "cate_model.json");
    io::save_cate_model(model_path, model);

    Vector cates = model.predict(X_kept);
    io::CsvTable csv;
    csv.header = {"cell_id", "cate"};
    for (std::size_t k = 0; k < report.kept_indices.size(); ++k) {
        csv.rows.push_back({ids[report.kept_indices[k]],
                            format_double(cates[static_cast<Eigen::Index>(k)])});
    }
    auto cates_path = out_file(config, "cates.csv");
    io::write_csv(cates_path, csv);

    write_manifest(config, "fit", {config.resolved_cross_section()},
                   {propensity_path, model_path, cates_path});
}

void cmd_interpret(const RunConfig& config) {
    ensure_out_dir(config);
    auto model = io::load_cate_model(out_file(config, "cate_model.json"));
    auto artifacts = load_estimation_artifacts(config);
    model.check_features(artifacts.table.feature_names);

    auto itree = causal::interpret_tree(
        artifacts.table.features(), artifacts.cates, config.interpret_depth,
        artifacts.table.feature_names, config.interpret_min_leaf);
    auto json_path = out_file(config, "interpretation_tree.json");
    auto text_path = out_file(config, "interpretation_tree.txt");
    io::save_interpretation(json_path, text_path, itree);
    write_manifest(config, "interpret",
                   {out_file(config, "cate_model.json"),
                    config.resolved_cross_section(), out_file(config, "cates.csv")},
                   {json_path, text_path});
}

void cmd_report(const RunConfig& config) {
    ensure_out_dir(config);
    auto model = io::load_cate_model(out_file(config, "cate_model.json"));
    auto artifacts = load_estimation_artifacts(config);
    model.check_features(artifacts.table.feature_names);

    auto map = analysis::build_suitability_map(artifacts.table, artifacts.cates);
    auto map_csv = out_file(config, "suitability_map.csv");
    auto map_geojson = out_file(config, "suitability_map.geojson");
    analysis::write_map_csv(map_csv, map);
    analysis::write_map_geojson(map_geojson, map);

    auto histogram = analysis::cate_histogram(artifacts.cates, config.histogram_bins);
    auto histogram_path = out_file(config, "cate_histogram.csv");
    analysis::write_histogram_csv(histogram_path, histogram);

    auto pairs_path = out_file(config, "cate_by_feature.csv");
    analysis::write_cate_by_feature(pairs_path, artifacts.table, artifacts.cates);

    json summary{{"format", "agrisuit.summary"},
                 {"version", 1},
                 {"treatment", practices::treatment_name(config.treatment)},
                 {"ate", model.ate},
                 {"ate_ci", json::array({model.ate_ci_low, model.ate_ci_high})},
                 {"n_estimated", artifacts.table.rows.size()},
                 {"cate_quantiles", analysis::cate_quantiles(artifacts.cates)},
                 {"first_stage",
                  {{"outcome_family", model.first_stage.outcome_family},
                   {"treatment_family", model.first_stage.treatment_family},
                   {"outcome_train_r2", model.first_stage.outcome_train_r2},
                   {"outcome_test_r2", model.first_stage.outcome_test_r2},
                   {"treatment_train_f1", model.first_stage.treatment_train_f1},
                   {"treatment_test_f1", model.first_stage.treatment_test_f1}}}};

    json spearman = json::object();
    for (const auto& [name, rho] : analysis::spearman_table(
             artifacts.table.features(), artifacts.table.feature_names,
             artifacts.cates)) {
        spearman[name] = std::isnan(rho) ? json() : json(rho);
    }
    summary["spearman"] = spearman;

    std::vector<std::string> outputs{map_csv, map_geojson, histogram_path,
                                     pairs_path};
    if (!config.shift.deltas.empty()) {
        auto result = analysis::counterfactual_shift(
            model, artifacts.table.features(), config.shift);
        io::CsvTable csv;
        csv.header = {"cell_id", "cate", "shifted_cate", "extrapolated"};
        for (std::size_t i = 0; i < artifacts.table.rows.size(); ++i) {
            csv.rows.push_back(
                {artifacts.table.rows[i].cell_id,
                 format_double(artifacts.cates[static_cast<Eigen::Index>(i)]),
                 format_double(result.shifted_cates[static_cast<Eigen::Index>(i)]),
                 result.extrapolated[i] ? "1" : "0"});
        }
        auto shift_path = out_file(config, "counterfactual.csv");
        io::write_csv(shift_path, csv);
        outputs.push_back(shift_path);

        json deltas = json::object();
        for (const auto& [name, delta] : config.shift.deltas) {
            deltas[name] = delta;
        }
        summary["counterfactual"] = {
            {"deltas", deltas},
            {"mean_cate", artifacts.cates.mean()},
            {"mean_shifted_cate", result.shifted_cates.mean()},
            {"flagged_fraction", result.flagged_fraction},
            {"extrapolation_threshold", config.shift.extrapolation_threshold},
            {"threshold_exceeded", result.threshold_exceeded}};
    }

    auto summary_path = out_file(config, "summary.json");
    io::write_json_file(summary_path, summary);
    outputs.push_back(summary_path);

    write_manifest(config, "report",
                   {out_file(config, "cate_model.json"),
                    config.resolved_cross_section(), out_file(config, "cates.csv")},
                   outputs);
}

} // namespace agrisuit::pipeline
