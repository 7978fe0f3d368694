// Command-line front end. Talks to the library exclusively through the
// public C surface, the same way any external consumer would.
//
// Exit codes: 0 success, 2 invalid configuration or usage, 3 file problems
// (unreadable, unwritable, malformed), 4 degenerate data, 1 anything else.

#include <CLI11.hpp>

#include <metaconf.h>

#include <cstdint>
#include <cstdio>
#include <string>

namespace {

int exit_code_for(mc_status status) {
    switch (status) {
        case MC_OK: return 0;
        case MC_ERR_CONFIG:
        case MC_ERR_INVALID_ARGUMENT: return 2;
        case MC_ERR_IO:
        case MC_ERR_FORMAT: return 3;
        case MC_ERR_DEGENERATE_LABELS: return 4;
        default: return 1;
    }
}

int complain(mc_status status) {
    std::fprintf(stderr, "metaconf: %s\n", mc_last_error());
    return exit_code_for(status);
}

struct Invocation {
    std::string config_path;
    std::string out_dir;
    std::string methods;
    std::uint64_t seed = 0;
    bool seed_given = false;

    // Loads the config, applies the overrides, and runs either the full
    // pipeline (stage == nullptr) or the named stage.
    int execute(const char* stage) const {
        mc_config* cfg = nullptr;
        mc_status st = mc_config_load(config_path.c_str(), &cfg);
        if (st != MC_OK) return complain(st);

        if (seed_given && (st = mc_config_set_seed(cfg, seed)) != MC_OK) {
            mc_config_free(cfg);
            return complain(st);
        }
        if (!out_dir.empty() && (st = mc_config_set_out_dir(cfg, out_dir.c_str())) != MC_OK) {
            mc_config_free(cfg);
            return complain(st);
        }
        if (!methods.empty() && (st = mc_config_set_methods(cfg, methods.c_str())) != MC_OK) {
            mc_config_free(cfg);
            return complain(st);
        }

        st = stage ? mc_run_stage(cfg, stage) : mc_run_experiment(cfg);
        mc_config_free(cfg);
        return st == MC_OK ? 0 : complain(st);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"confidence-scoring experiment pipeline"};
    app.set_version_flag("--version", mc_version());
    app.require_subcommand(1);

    Invocation inv;
    int exit_code = 0;

    struct StageSpec {
        const char* name;
        const char* stage; // nullptr = full pipeline
        const char* blurb;
    };
    const StageSpec specs[] = {
        {"run", nullptr, "run the full pipeline and write every report"},
        {"gen-data", "gen-data", "materialize the data splits as csv files"},
        {"train-base", "train-base", "train the base classifier"},
        {"train-probes", "train-probes", "fit one linear probe per base-model layer"},
        {"train-meta", "train-meta", "fit the requested confidence meta-models"},
        {"evaluate", "evaluate", "score the test and pooled sets and write reports"},
        {"importance", "importance", "write the boosted-model feature-importance grids"},
        {"quadrants", "quadrants", "write accept/reject vs correct/incorrect index sets"},
    };

    for (const StageSpec& spec : specs) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.blurb);
        sub->add_option("--config", inv.config_path, "experiment config file (json)")
            ->required();
        sub->add_option("--out", inv.out_dir, "override the output directory");
        CLI::Option* seed_opt =
            sub->add_option("--seed", inv.seed, "override the master seed");
        sub->add_option("--methods", inv.methods,
                        "comma-separated subset of the configured methods");
        const char* stage = spec.stage;
        sub->callback([&inv, seed_opt, stage, &exit_code] {
            inv.seed_given = seed_opt->count() > 0;
            exit_code = inv.execute(stage);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints help or the usage error
        return rc == 0 ? 0 : 2;
    }
    return exit_code;
}
