// urnctl: command-line driver for the interacting urn engine.

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, urn::cli::CommonOptions& common, bool config_required) {
    auto* cfg = cmd->add_option("--config", common.config_path, "Experiment configuration (JSON)");
    if (config_required) cfg->required();
    cmd->add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", common.seed, "Seed override for the command's random stream");
    cmd->add_option("--alpha", common.alpha, "Override the reinforcement strength alpha");
    cmd->add_flag("--quiet", common.quiet, "Print only the essential result");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace urn::cli;

    CLI::App app{"Interacting Polya urns on complete graphs: simulation, fixed points and mean-field flow"};
    app.require_subcommand(1);

    CommonOptions common;
    SimulateOptions sim;
    FixedPointsOptions fp;
    FlowOptions flow;
    std::optional<int> sweep_starts;

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo batch of urn processes");
    add_common(simulate, common, true);
    simulate->add_option("--n-runs", sim.n_runs, "Number of runs (overrides sim.n_runs)");
    simulate->add_option("--n-steps", sim.n_steps, "Steps per run (overrides sim.n_steps)");
    simulate->add_option("--snapshot-every", sim.snapshot_every, "Write a snapshot file per run, every k steps");
    simulate->add_option("--hit-radius", sim.hit_radius, "l_inf radius counted as a hit")->capture_default_str();

    auto* fixed = app.add_subcommand("fixed-points", "Multi-start search for fixed points of pi");
    add_common(fixed, common, false);
    fixed->add_option("--n-starts", fp.n_starts, "Newton starts (overrides fp.n_starts)");
    fixed->add_flag("--verify-example1", fp.verify_example1, "Run the d=3, c=2 golden checks");
    fixed->add_flag("--contraction-check", fp.contraction_check, "Print the l1 contraction bound and verdict");

    auto* flowcmd = app.add_subcommand("flow", "Integrate the mean-field ODE and check Lyapunov descent");
    add_common(flowcmd, common, true);
    flowcmd->add_option("--n-starts", flow.n_starts, "Random starting points (overrides flow.n_starts)");
    flowcmd->add_option("--t-end", flow.t_end, "Integration horizon");
    flowcmd->add_option("--step", flow.h, "RK4 step size h");

    auto* sweep = app.add_subcommand("sweep", "Fixed-point census for each alpha in sweep.alpha_values");
    add_common(sweep, common, true);
    sweep->add_option("--n-starts", sweep_starts, "Newton starts per alpha");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*simulate) return cmd_simulate(common, sim, std::cout);
        if (*fixed) {
            if (!fp.verify_example1 && common.config_path.empty()) {
                std::cerr << "fixed-points: --config <path> is required unless --verify-example1 is given\n";
                return kUsage;
            }
            return cmd_fixed_points(common, fp, std::cout);
        }
        if (*flowcmd) return cmd_flow(common, flow, std::cout);
        if (*sweep) return cmd_sweep(common, sweep_starts, std::cout);
    } catch (const urn::io::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kUsage;
    } catch (const urn::IntegrationError& e) {
        std::cerr << "integration failure: " << e.what() << '\n';
        return kCheckFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
