#ifndef AGRISUIT_PIPELINE_HPP
#define AGRISUIT_PIPELINE_HPP

#include "agrisuit/analysis.hpp"
#include "agrisuit/causal_forest.hpp"
#include "agrisuit/data_model.hpp"
#include "agrisuit/dml.hpp"
#include "agrisuit/overlap.hpp"
#include "agrisuit/practices.hpp"
#include "agrisuit/synthetic.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace agrisuit::pipeline {

// Everything a run needs, resolved from the config file plus flag
// overrides (flags win). The seed is mandatory.
struct RunConfig {
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    int threads = 0; // 0 = hardware concurrency

    practices::Treatment treatment = practices::Treatment::crop_rotation;
    double cropland_threshold = 0.8;
    double trim_low = 0.2;
    double trim_high = 0.8;
    int min_units = 200;

    // inputs
    std::string panel_path;
    std::string parcels_path;
    std::string grid_path;
    std::string abundances_path;
    std::string cross_section_path; // default <out>/cross_section.csv
    data::PanelSchema schema;
    std::vector<std::string> major_crops; // empty = auto-select top crops
    std::size_t major_crop_count = 4;

    dml::NuisanceSpec nuisance = dml::NuisanceSpec::defaults();
    learners::SearchSpec propensity_model;
    int propensity_k_folds = 3;

    dml::CateKind final_stage = dml::CateKind::causal_forest;
    dml::LinearBasis linear_basis = dml::LinearBasis::intercept_only;
    causal::CausalForestSpec forest;

    int interpret_depth = 2;
    int interpret_min_leaf = 1;
    int histogram_bins = 30;
    analysis::ShiftSpec shift; // empty deltas = no counterfactual section

    synthetic::SyntheticSpec synthetic_spec;

    RunConfig();

    std::uint64_t require_seed() const;
    std::string resolved_cross_section() const;
    // canonical JSON of the effective settings; digested into manifests
    nlohmann::json effective_json() const;
};

RunConfig load_config(const std::string& path);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> treatment;
    std::optional<int> threads;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

// Pipeline stages, mirroring the CLI subcommands. Each writes its outputs
// plus `<stage>_manifest.json` under config.out_dir.
void cmd_ingest(const RunConfig& config);
void cmd_practices(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_interpret(const RunConfig& config);
void cmd_report(const RunConfig& config);
void cmd_simulate(const RunConfig& config);

} // namespace agrisuit::pipeline

#endif
