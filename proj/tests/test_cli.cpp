#include <doctest.h>

#include "agrisuit/data_model.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <string>

#ifndef AGRISUIT_CLI_PATH
#error "AGRISUIT_CLI_PATH must be defined by the build"
#endif

namespace {

struct RunResult {
    int exit_code = 0;
    std::string stderr_text;
};

RunResult run_cli(const std::string& args, const std::string& stderr_file) {
    std::string command = std::string(AGRISUIT_CLI_PATH) + " " + args +
                          " > /dev/null 2> " + stderr_file;
    int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.stderr_text = test_util::read_file(stderr_file);
    return result;
}

const char* kPanelCsv =
    "cell_id,year,npp,lon,lat,maize,wheat,grass,tmax,precip\n"
    "A,2010,610,4.10,50.20,0.50,0.30,0.10,15.2,700\n"
    "A,2011,640,4.10,50.20,0.30,0.50,0.10,15.6,690\n"
    "B,2010,580,4.11,50.20,0.80,0.10,0.05,14.9,720\n"
    "B,2011,575,4.11,50.20,0.75,0.15,0.05,15.0,710\n"
    "C,2010,300,4.12,50.20,0.10,0.05,0.05,16.0,600\n"
    "C,2011,320,4.12,50.20,0.10,0.05,0.05,16.2,605\n"
    "D,2010,620,4.13,50.20,0.20,0.60,0.15,15.1,701\n"
    "D,2011,615,4.13,50.20,0.55,0.25,0.15,15.2,702\n";

std::string panel_config(const test_util::TempDir& dir,
                         const std::string& panel_path,
                         const std::string& out_dir) {
    std::string config_path = dir.file("config.json");
    std::string config = R"({
  "seed": 11,
  "out": ")" + out_dir + R"(",
  "treatment": "cr",
  "cropland_threshold": 0.8,
  "inputs": {"panel": ")" + panel_path + R"("},
  "panel_schema": {
    "cell_id": "cell_id", "year": "year", "outcome": "npp",
    "lon": "lon", "lat": "lat",
    "abundance_columns": ["maize", "wheat", "grass"],
    "environment_columns": ["tmax", "precip"]
  },
  "major_crops": ["maize", "wheat"]
})";
    test_util::write_file(config_path, config);
    return config_path;
}

} // namespace

TEST_CASE("cli: ingest writes practice tables and is byte-deterministic") {
    test_util::TempDir dir;
    auto panel_path = dir.file("panel.csv");
    test_util::write_file(panel_path, kPanelCsv);
    auto config_path = panel_config(dir, panel_path, dir.file("out"));

    auto first = run_cli("ingest --config " + config_path, dir.file("err1"));
    CHECK(first.exit_code == 0);
    auto records_once = test_util::read_file(dir.file("out/practice_records.csv"));
    CHECK(records_once.find("shannon_H") != std::string::npos);

    auto second = run_cli("ingest --config " + config_path, dir.file("err2"));
    CHECK(second.exit_code == 0);
    CHECK(test_util::read_file(dir.file("out/practice_records.csv")) ==
          records_once);
    CHECK(test_util::read_file(dir.file("out/ingest_manifest.json")) ==
          test_util::read_file(dir.file("out/ingest_manifest.json")));
}

TEST_CASE("cli: practices builds a binarized cross-section over cropland cells") {
    test_util::TempDir dir;
    auto panel_path = dir.file("panel.csv");
    test_util::write_file(panel_path, kPanelCsv);
    auto config_path = panel_config(dir, panel_path, dir.file("out"));

    auto run = run_cli("practices --config " + config_path, dir.file("err"));
    CHECK(run.exit_code == 0);
    auto table = agrisuit::data::read_cross_section(dir.file("out/cross_section.csv"));
    // cell C falls below the 0.8 cropland threshold
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) {
        CHECK(row.cell_id != "C");
        CHECK((row.treated == 0 || row.treated == 1));
    }
    // features: env means + major crop abundances
    CHECK(table.feature_names ==
          std::vector<std::string>{"precip", "tmax", "maize_abundance",
                                   "wheat_abundance"});
    // cell A rotation: |0.3-0.5|+|0.5-0.3| = 0.4 summed over one pair
    const auto& row_a = table.rows[0];
    CHECK(row_a.cell_id == "A");
    CHECK(row_a.treatment_raw == doctest::Approx(0.4));
    CHECK(row_a.y == doctest::Approx(625.0));
}

TEST_CASE("cli: parcel GeoJSON plus grid yields a per-cell abundance table") {
    test_util::TempDir dir;
    auto parcels_path = dir.file("parcels.geojson");
    test_util::write_file(parcels_path, R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature",
     "properties": {"parcel_id": "p1", "crop": "maize", "year": 2010},
     "geometry": {"type": "Polygon",
                  "coordinates": [[[0,0],[500,0],[500,500],[0,500],[0,0]]]}},
    {"type": "Feature",
     "properties": {"parcel_id": "p2", "crop": "wheat", "year": 2010},
     "geometry": {"type": "Polygon",
                  "coordinates": [[[500,0],[1000,0],[1000,500],[500,500],[500,0]]]}}
  ]
})");
    auto grid_path = dir.file("grid.csv");
    test_util::write_file(grid_path,
                          "cell_id,lon,lat\n"
                          "g1,250,250\n"
                          "g2,750,250\n");
    auto config_path = dir.file("config.json");
    test_util::write_file(config_path, R"({
  "seed": 5,
  "out": ")" + dir.file("out") + R"(",
  "inputs": {"parcels": ")" + parcels_path + R"(", "grid": ")" + grid_path + R"("},
  "panel_schema": {"cell_size_m": 500}
})");
    auto run = run_cli("ingest --config " + config_path, dir.file("err"));
    REQUIRE(run.exit_code == 0);
    auto table = test_util::read_file(dir.file("out/abundances.csv"));
    CHECK(table.find("cell_id,year,crop,fraction") != std::string::npos);
    CHECK(table.find("g1,2010,maize,1") != std::string::npos);
    CHECK(table.find("g2,2010,wheat,1") != std::string::npos);
}

TEST_CASE("cli: malformed panel input fails with diagnostics and exit code 3") {
    test_util::TempDir dir;
    auto panel_path = dir.file("panel.csv");
    test_util::write_file(panel_path,
                          "cell_id,year,npp,lon,lat,maize,wheat,grass,tmax,precip\n"
                          "A,2010,610,4.1,50.2,1.50,0.30,0.10,15.2,700\n");
    auto config_path = panel_config(dir, panel_path, dir.file("out"));
    auto run = run_cli("ingest --config " + config_path, dir.file("err"));
    CHECK(run.exit_code == 3);
    CHECK(run.stderr_text.find("row=2") != std::string::npos);
    CHECK(run.stderr_text.find("code=MalformedNumber") != std::string::npos);
    CHECK(run.stderr_text.find("stage=ingest") != std::string::npos);
}

TEST_CASE("cli: report before fit is a MissingArtifact data error") {
    test_util::TempDir dir;
    auto config_path = dir.file("config.json");
    test_util::write_file(config_path, R"({"seed": 3, "out": ")" +
                                           dir.file("out") + R"("})");
    auto run = run_cli("report --config " + config_path, dir.file("err"));
    CHECK(run.exit_code == 3);
    CHECK(run.stderr_text.find("MissingArtifact") != std::string::npos);
}

TEST_CASE("cli: config errors exit with code 2") {
    test_util::TempDir dir;

    SUBCASE("missing seed") {
        auto config_path = dir.file("config.json");
        test_util::write_file(config_path,
                              R"({"out": ")" + dir.file("out") + R"("})");
        auto run = run_cli("simulate --config " + config_path, dir.file("err"));
        CHECK(run.exit_code == 2);
        CHECK(run.stderr_text.find("seed") != std::string::npos);
    }

    SUBCASE("unknown treatment name") {
        auto config_path = dir.file("config.json");
        test_util::write_file(config_path,
                              R"({"seed": 1, "treatment": "tillage"})");
        auto run = run_cli("simulate --config " + config_path, dir.file("err"));
        CHECK(run.exit_code == 2);
    }

    SUBCASE("invalid JSON is a data error") {
        auto config_path = dir.file("config.json");
        test_util::write_file(config_path, "{nope");
        auto run = run_cli("simulate --config " + config_path, dir.file("err"));
        CHECK(run.exit_code == 3);
    }
}

TEST_CASE("cli: simulate then fit runs end to end on a small synthetic") {
    test_util::TempDir dir;
    auto config_path = dir.file("config.json");
    test_util::write_file(config_path, R"({
  "seed": 9,
  "out": ")" + dir.file("out") + R"(",
  "synthetic": {
    "n": 600, "d": 4,
    "theta": {"kind": "constant", "value": 2.0},
    "confounding_strength": 1.0, "outcome_noise": 1.0
  },
  "first_stage": {
    "outcome": {"family": "random_forest",
                "grid": {"n_trees": [30], "max_depth": [8], "min_samples_leaf": [20]}},
    "treatment": {"family": "logistic", "grid": {"l2": [0.1]}}
  },
  "final_stage": {"kind": "linear"}
})");
    auto simulate = run_cli("simulate --config " + config_path, dir.file("e1"));
    REQUIRE(simulate.exit_code == 0);
    auto fit = run_cli("fit --config " + config_path, dir.file("e2"));
    REQUIRE(fit.exit_code == 0);
    auto interpret = run_cli("interpret --config " + config_path, dir.file("e3"));
    CHECK(interpret.exit_code == 0);
    auto report = run_cli("report --config " + config_path, dir.file("e4"));
    CHECK(report.exit_code == 0);

    auto summary = test_util::read_file(dir.file("out/summary.json"));
    CHECK(summary.find("\"ate\"") != std::string::npos);
    auto tree_text = test_util::read_file(dir.file("out/interpretation_tree.txt"));
    CHECK(tree_text.find("leaf n=") != std::string::npos);

    // the exported map covers exactly the post-trim estimation sample
    auto count_lines = [](const std::string& text) {
        return std::count(text.begin(), text.end(), '\n');
    };
    auto map_lines = count_lines(test_util::read_file(dir.file("out/suitability_map.csv")));
    auto cate_lines = count_lines(test_util::read_file(dir.file("out/cates.csv")));
    CHECK(map_lines == cate_lines);
}

TEST_CASE("cli: manifests distinguish configs that differ only in theta") {
    test_util::TempDir dir;
    auto make_config = [&](const std::string& name, double value) {
        auto path = dir.file(name);
        test_util::write_file(path, R"({
  "seed": 6,
  "out": ")" + dir.file("out_" + name) + R"(",
  "synthetic": {"n": 50, "d": 2,
                "theta": {"kind": "constant", "value": )" +
                                       std::to_string(value) + R"(}}
})");
        return path;
    };
    auto a = run_cli("simulate --config " + make_config("a.json", 1.0),
                     dir.file("e1"));
    auto b = run_cli("simulate --config " + make_config("b.json", 2.0),
                     dir.file("e2"));
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    auto digest_of = [&](const std::string& out_name) {
        auto manifest = test_util::read_file(
            dir.file(out_name + "/simulate_manifest.json"));
        auto key = manifest.find("config_digest");
        REQUIRE(key != std::string::npos);
        return manifest.substr(key, 60);
    };
    CHECK(digest_of("out_a.json") != digest_of("out_b.json"));
}

TEST_CASE("cli: estimation failures exit with code 4") {
    test_util::TempDir dir;
    // single-class treatment survives loading but breaks estimation
    agrisuit::data::CrossSectionTable table;
    table.feature_names = {"x0"};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int i = 0; i < 250; ++i) {
        agrisuit::data::CrossSectionRow row;
        row.cell_id = "c" + std::to_string(i);
        row.x = agrisuit::Vector(1);
        row.x << unif(rng);
        row.treatment_raw = 1.0;
        row.treated = 1;
        row.y = unif(rng);
        table.rows.push_back(row);
    }
    std::filesystem::create_directories(dir.file("out"));
    auto cross_path = dir.file("cs.csv");
    agrisuit::data::write_cross_section(cross_path, table);
    auto config_path = dir.file("config.json");
    test_util::write_file(config_path, R"({
  "seed": 2,
  "out": ")" + dir.file("out") + R"(",
  "inputs": {"cross_section": ")" + cross_path + R"("}
})");
    auto run = run_cli("fit --config " + config_path, dir.file("err"));
    CHECK(run.exit_code == 4);
    CHECK(run.stderr_text.find("SingleClass") != std::string::npos);
}

TEST_CASE("cli: fit binarizes a cross-section whose treated column is blank") {
    test_util::TempDir dir;
    // build a cross-section with raw-only treatments via the library
    agrisuit::data::CrossSectionTable table;
    table.feature_names = {"x0", "x1"};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int i = 0; i < 400; ++i) {
        agrisuit::data::CrossSectionRow row;
        row.cell_id = "c" + std::to_string(1000 + i);
        row.x = agrisuit::Vector(2);
        row.x << unif(rng), unif(rng);
        row.treatment_raw = 0.3 * row.x[0] + unif(rng);
        row.treated = -1; // blank on disk
        row.y = 2.0 * (row.treatment_raw > 0) + row.x[1] + 0.3 * unif(rng);
        table.rows.push_back(row);
    }
    std::filesystem::create_directories(dir.file("out"));
    auto cross_path = dir.file("cross_section.csv");
    agrisuit::data::write_cross_section(cross_path, table);

    auto config_path = dir.file("config.json");
    test_util::write_file(config_path, R"({
  "seed": 4,
  "out": ")" + dir.file("out") + R"(",
  "inputs": {"cross_section": ")" + cross_path + R"("},
  "first_stage": {
    "outcome": {"family": "random_forest",
                "grid": {"n_trees": [20], "max_depth": [6], "min_samples_leaf": [20]}},
    "treatment": {"family": "logistic", "grid": {"l2": [0.1]}}
  },
  "final_stage": {"kind": "linear"}
})");
    auto fit = run_cli("fit --config " + config_path, dir.file("err"));
    CHECK(fit.exit_code == 0);
    auto cates = test_util::read_file(dir.file("out/cates.csv"));
    CHECK(cates.find("cell_id,cate") != std::string::npos);
}
