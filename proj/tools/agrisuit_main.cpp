#include "agrisuit/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using agrisuit::pipeline::Overrides;
using agrisuit::pipeline::RunConfig;

int exit_code_for(agrisuit::ErrorKind kind) {
    switch (kind) {
    case agrisuit::ErrorKind::config: return 2;
    case agrisuit::ErrorKind::data: return 3;
    case agrisuit::ErrorKind::estimation: return 4;
    }
    return 1;
}

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    std::string treatment;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (JSON)");
    cmd->add_option("--seed", args.seed, "run seed (mandatory, here or in config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--treatment", args.treatment,
                    "treatment: cr or lcd")
        ->check(CLI::IsMember({"cr", "lcd", "crop_rotation",
                               "landscape_crop_diversity"}));
    cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
}

RunConfig resolve(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) {
        config = agrisuit::pipeline::load_config(args.config_path);
    }
    Overrides overrides;
    if (args.seed_set) {
        overrides.seed = args.seed;
    }
    if (!args.out_dir.empty()) {
        overrides.out_dir = args.out_dir;
    }
    if (!args.treatment.empty()) {
        overrides.treatment = args.treatment;
    }
    if (args.threads >= 0) {
        overrides.threads = args.threads;
    }
    agrisuit::pipeline::apply_overrides(config, overrides);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"agrisuit: land suitability scoring via double machine learning"};
    app.require_subcommand(1);

    struct Stage {
        const char* name;
        const char* description;
        void (*run)(const RunConfig&);
    };
    const Stage stages[] = {
        {"ingest", "validate panel input and derive per-cell practice tables",
         agrisuit::pipeline::cmd_ingest},
        {"practices", "build treatments and the aggregated cross-section",
         agrisuit::pipeline::cmd_practices},
        {"fit", "trim overlap and fit the two-stage effect model",
         agrisuit::pipeline::cmd_fit},
        {"interpret", "fit the depth-constrained interpretation tree",
         agrisuit::pipeline::cmd_interpret},
        {"report", "export the suitability map and diagnostics",
         agrisuit::pipeline::cmd_report},
        {"simulate", "generate a synthetic cross-section with a known effect",
         agrisuit::pipeline::cmd_simulate},
    };

    std::vector<CommonArgs> args(std::size(stages));
    for (std::size_t k = 0; k < std::size(stages); ++k) {
        auto* cmd = app.add_subcommand(stages[k].name, stages[k].description);
        add_common(cmd, args[k]);
        cmd->callback([&stages, &args, k] {
            const auto& stage = stages[k];
            try {
                stage.run(resolve(args[k]));
            } catch (const agrisuit::Error& error) {
                std::cerr << "error: stage=" << stage.name
                          << " code=" << error.code() << " detail=" << error.what()
                          << '\n';
                std::exit(exit_code_for(error.kind()));
            } catch (const std::exception& error) {
                std::cerr << "error: stage=" << stage.name
                          << " detail=" << error.what() << '\n';
                std::exit(1);
            }
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
