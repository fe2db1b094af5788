#include "gd/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "gd/pipeline.hpp"

namespace gd {

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"Self-distillation pretraining with KNN-graph refinement"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool quiet = false;
    std::string sweep;

    app.add_option("--config", config_path, "configuration file (section.key = value lines)");
    app.add_option("--seed", seed, "override run.seed")->each([&](const std::string&) {
        has_seed = true;
    });
    app.add_option("--out", out_dir, "override run.out_dir");
    app.add_flag("--quiet", quiet, "suppress progress output");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    CLI::App* pretrain = app.add_subcommand("pretrain", "run the distillation phase");
    CLI::App* refine = app.add_subcommand("refine", "run the GNN refinement phase");
    CLI::App* probe = app.add_subcommand("probe", "evaluate frozen embeddings");
    CLI::App* pipeline = app.add_subcommand("pipeline", "synth + pretrain + refine + probe");
    CLI::App* ablate = app.add_subcommand("ablate", "sweep one parameter and tabulate accuracy");
    ablate->add_option("--sweep", sweep, "parameter to sweep: kw, layer, or jk")
        ->required()
        ->check(CLI::IsMember({"kw", "layer", "jk"}));

    std::vector<const char*> argv;
    argv.push_back("graphdistill");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : parse_config(config_path);
        if (has_seed) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();

        if (synth->parsed()) stage_synth(cfg, quiet);
        else if (pretrain->parsed()) stage_pretrain(cfg, quiet);
        else if (refine->parsed()) stage_refine(cfg, quiet);
        else if (probe->parsed()) stage_probe(cfg, quiet);
        else if (pipeline->parsed()) run_pipeline(cfg, quiet);
        else if (ablate->parsed()) {
            SweepKind kind = sweep == "kw" ? SweepKind::KW
                             : sweep == "layer" ? SweepKind::Layer
                                                : SweepKind::JK;
            run_ablate(cfg, kind, quiet);
        }
        return 0;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace gd
