#include <doctest.h>

#include "agrisuit/data_model.hpp"
#include "agrisuit/io/serialize.hpp"
#include "test_util.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#ifndef AGRISUIT_CLI_PATH
#error "AGRISUIT_CLI_PATH must be defined by the build"
#endif

namespace {

int run_stage(const std::string& stage, const std::string& config_path,
              const std::string& stderr_file) {
    std::string command = std::string(AGRISUIT_CLI_PATH) + " " + stage +
                          " --config " + config_path + " > /dev/null 2> " +
                          stderr_file;
    int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 320 cells x 4 years with rotating crop mixes: maize/wheat dominate, a
// noisy potato share keeps diversity from being a pure function of the
// modeled controls, and 20 cells fall below the cropland threshold.
std::string synthetic_panel() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::ostringstream csv;
    csv << "cell_id,year,npp,lon,lat,maize,wheat,potato,tmax,precip\n";
    for (int i = 0; i < 320; ++i) {
        double base_maize = 0.3 + 0.2 * unif(rng);
        double warmth = 14.0 + 2.0 * unif(rng);
        bool bare = i >= 300;
        for (int year = 2010; year < 2014; ++year) {
            double wobble = 0.2 * (unif(rng) - 0.5);
            double maize = std::clamp(base_maize + wobble, 0.05, 0.6);
            double potato = 0.05 + 0.25 * unif(rng);
            double wheat = std::max(0.0, 0.92 - maize - potato);
            double scale = bare ? 0.3 : 1.0;
            double tmax = warmth + 0.3 * (unif(rng) - 0.5);
            double precip = 650 + 100 * unif(rng);
            double npp = 400 + 150 * maize + 20 * (tmax - 14.0) +
                         0.05 * (precip - 700) + 8 * unif(rng);
            char id[16];
            std::snprintf(id, sizeof(id), "c%04d", i);
            csv << id << ',' << year << ',' << npp << ','
                << (i % 20) * 0.01 << ',' << (i / 20) * 0.01 << ','
                << maize * scale << ',' << wheat * scale << ','
                << potato * scale << ',' << tmax << ',' << precip << '\n';
        }
    }
    return csv.str();
}

} // namespace

TEST_CASE("pipeline: panel to suitability map end to end (lcd treatment)") {
    test_util::TempDir dir;
    auto panel_path = dir.file("panel.csv");
    test_util::write_file(panel_path, synthetic_panel());
    auto out_dir = dir.file("out");
    auto config_path = dir.file("config.json");
    test_util::write_file(config_path, R"({
  "seed": 31,
  "out": ")" + out_dir + R"(",
  "treatment": "lcd",
  "cropland_threshold": 0.8,
  "min_units": 150,
  "inputs": {"panel": ")" + panel_path + R"("},
  "panel_schema": {
    "cell_id": "cell_id", "year": "year", "outcome": "npp",
    "lon": "lon", "lat": "lat",
    "abundance_columns": ["maize", "wheat", "potato"],
    "environment_columns": ["tmax", "precip"]
  },
  "major_crops": ["maize", "wheat"],
  "first_stage": {
    "outcome": {"family": "random_forest",
                "grid": {"n_trees": [30], "max_depth": [8], "min_samples_leaf": [10]}},
    "treatment": {"family": "logistic", "grid": {"l2": [0.1]}}
  },
  "final_stage": {"kind": "causal_forest",
                  "forest": {"n_trees": 80, "min_samples_leaf": 5}},
  "interpret": {"max_depth": 2},
  "report": {"histogram_bins": 12, "shift": {"deltas": {"tmax": 1.0}}}
})");

    REQUIRE(run_stage("ingest", config_path, dir.file("e0")) == 0);
    REQUIRE(run_stage("practices", config_path, dir.file("e1")) == 0);

    auto table = agrisuit::data::read_cross_section(out_dir + "/cross_section.csv");
    // bare cells dropped by the cropland filter
    CHECK(table.rows.size() == 300);
    CHECK(table.feature_names ==
          std::vector<std::string>{"precip", "tmax", "maize_abundance",
                                   "wheat_abundance"});
    int treated = 0;
    for (const auto& row : table.rows) {
        // lcd aggregates by the mean: per-cell H' stays within ln(3)
        CHECK(row.treatment_raw > 0.0);
        CHECK(row.treatment_raw <= std::log(3.0) + 1e-12);
        treated += row.treated;
    }
    CHECK(treated > 0);
    CHECK(treated < 300);

    REQUIRE(run_stage("fit", config_path, dir.file("e2")) == 0);
    REQUIRE(run_stage("interpret", config_path, dir.file("e3")) == 0);
    REQUIRE(run_stage("report", config_path, dir.file("e4")) == 0);

    auto model = agrisuit::io::load_cate_model(out_dir + "/cate_model.json");
    CHECK(model.forest != nullptr);
    CHECK(model.feature_names == table.feature_names);
    CHECK(std::isfinite(model.ate));

    auto summary = nlohmann::json::parse(test_util::read_file(out_dir + "/summary.json"));
    CHECK(summary["treatment"] == "landscape_crop_diversity");
    CHECK(summary["spearman"].contains("tmax"));
    CHECK(summary["counterfactual"]["deltas"]["tmax"].get<double>() == 1.0);
    CHECK(summary["n_estimated"].get<int>() >= 150);

    auto tree_text = test_util::read_file(out_dir + "/interpretation_tree.txt");
    CHECK(tree_text.find("leaf n=") != std::string::npos);
}
