#include "qloss/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

// Command-line front end. Every subcommand is a thin wrapper over the
// pipeline with a restricted stage selection; run-all executes every stage
// whose inputs are configured.

namespace {

int run_stages(qloss::PipelineConfig cfg,
               const std::vector<std::string>& stages) {
    cfg.stages = stages;
    try {
        const qloss::RunReport report = qloss::run_pipeline(cfg);
        std::cout << report.to_text();
        return 0;
    } catch (const qloss::StageError& e) {
        std::cerr << "error in stage " << e.stage << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loss-budget analysis chain for superconducting-qubit "
                 "cross-sections"};
    app.require_subcommand(1);

    qloss::PipelineConfig cfg;
    std::vector<std::string> geometry_paths;

    app.add_option("--out", cfg.out_dir, "Output directory")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--devices", cfg.device_table, "Device table (TSV)");
    app.add_option("--participation", cfg.participation_table,
                   "Reference participation table (TSV)");
    app.add_option("--exclude-device", cfg.exclude_devices,
                   "Device names to drop from the loss fit");
    app.add_option("--pma-source", cfg.pma_source,
                   "p_MA source for the loss fit: reference or computed")
        ->check(CLI::IsMember({"reference", "computed"}));
    app.add_flag("--weighted", cfg.weighted,
                 "Weight the loss fit by the 1/Q standard errors");
    app.add_option("--f-ref", cfg.f_ref_ghz,
                   "Reference frequency (GHz) for the junction-limited T1")
        ->capture_default_str();

    auto* sim = app.add_subcommand("simulate-participation",
                                   "Solve the cross-section field problem "
                                   "and report participation ratios");
    sim->add_option("--config", geometry_paths, "Geometry config file(s)")
        ->required();
    sim->add_option("--min-cell-nm", cfg.mesh_min_cell_nm,
                    "Smallest mesh cell (nm)")
        ->capture_default_str();
    sim->add_option("--grading", cfg.mesh_grading, "Mesh grading ratio")
        ->capture_default_str();

    auto* loss = app.add_subcommand(
        "fit-loss", "Regress 1/Q against p_MA and extract the "
                    "junction-limited T1");
    loss->add_option("--config", geometry_paths,
                     "Geometry config file(s), used with --pma-source "
                     "computed");

    auto* coh = app.add_subcommand("fit-coherence",
                                   "Fit T1/Ramsey/echo traces and summarize "
                                   "the repeated-T1 distribution");
    coh->add_option("--traces", cfg.trace_manifest, "Trace manifest (TSV)")
        ->required();

    auto* rba = app.add_subcommand("rb-analyze",
                                   "Fit a measured RB decay dataset");
    rba->add_option("--data", cfg.rb_data, "RB dataset (TSV)")->required();

    auto* rbs = app.add_subcommand("rb-simulate",
                                   "Run the density-matrix RB oracle and fit "
                                   "the resulting decay");
    rbs->add_option("--t1", cfg.rb_noise.t1_us, "T1 (us)")
        ->capture_default_str();
    rbs->add_option("--t2", cfg.rb_noise.t2_us, "T2 (us)")
        ->capture_default_str();
    rbs->add_option("--tg", cfg.rb_noise.tg_ns, "Gate time (ns)")
        ->capture_default_str();
    rbs->add_option("--lengths", cfg.rb_lengths, "Sequence lengths");
    rbs->add_option("--reps", cfg.rb_seeds_per_length,
                    "Random sequences per length")
        ->capture_default_str();

    auto* jj = app.add_subcommand("jj-rsd",
                                  "Fit the junction-resistance RSD area "
                                  "scaling model");
    jj->add_option("--data", cfg.jj_data, "Junction resistance table (TSV)")
        ->required();

    auto* all = app.add_subcommand("run-all",
                                   "Run every stage with configured inputs");
    all->add_option("--config", geometry_paths, "Geometry config file(s)");
    all->add_option("--traces", cfg.trace_manifest, "Trace manifest (TSV)");
    all->add_option("--rb-data", cfg.rb_data, "RB dataset (TSV)");
    all->add_option("--jj-data", cfg.jj_data, "Junction resistance table");
    all->add_flag("--simulate-rb", cfg.simulate_rb,
                  "Run the RB oracle instead of reading --rb-data");

    CLI11_PARSE(app, argc, argv);

    for (const auto& p : geometry_paths) cfg.geometry_configs.push_back(p);

    if (sim->parsed()) return run_stages(cfg, {"participation"});
    if (loss->parsed()) {
        if (cfg.pma_source == "computed") {
            return run_stages(cfg, {"participation", "loss"});
        }
        return run_stages(cfg, {"loss"});
    }
    if (coh->parsed()) return run_stages(cfg, {"coherence"});
    if (rba->parsed()) return run_stages(cfg, {"rb"});
    if (rbs->parsed()) {
        cfg.simulate_rb = true;
        return run_stages(cfg, {"rb"});
    }
    if (jj->parsed()) return run_stages(cfg, {"jj"});
    if (all->parsed()) return run_stages(cfg, {});
    return 0;
}
