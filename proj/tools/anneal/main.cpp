// anneal: run genetic optimizations of quantum-annealing schedules and
// optimal-driving operators from a JSON config.

#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Genetic optimization of quantum annealing schedules and optimal driving"};
    app.require_subcommand(1);

    anneal::CommandOptions opts;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string output;

    auto add_common = [&](CLI::App* cmd, bool with_seed) {
        cmd->add_option("-c,--config", opts.config, "Experiment config (JSON)")->required();
        cmd->add_option("-o,--output", output, "Output directory (overrides output_dir)");
        if (with_seed) {
            cmd->add_option("-s,--seed", seed, "Base seed (overrides problem.ga.seed)");
            cmd->add_option("-w,--workers", workers, "Worker threads, 0 = all cores");
        }
    };

    auto* run = app.add_subcommand("run", "Repeated GA optimization; writes runs.jsonl and summary.json");
    add_common(run, true);
    auto* baseline = app.add_subcommand("baseline", "Linear schedules without optimal driving");
    add_common(baseline, false);
    auto* timescale = app.add_subcommand("timescale", "Adiabatic timescale T_AD and T = T_AD / 10");
    timescale->add_option("-c,--config", opts.config, "Experiment config (JSON)")->required();

    anneal::PlotRequest plot;
    std::string plot_output;
    auto* plotdata = app.add_subcommand("plotdata", "Tables for plotting from result directories");
    plotdata->add_option("-r,--results", plot.results, "Result directory (repeatable)")->required();
    plotdata->add_option("-k,--kind", plot.kind, "gap | pgs | schedules | histogram | boxplot | approx_ratio")
        ->required();
    plotdata->add_option("-b,--bins", plot.bins, "Histogram bins on [0, 1]")->capture_default_str();
    plotdata->add_option("-o,--output", plot_output, "Write the table to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return anneal::kExitConfig;
    }

    if (run->count("--seed")) opts.seed = seed;
    if (run->count("--workers")) opts.workers = workers;
    if (run->count("--output") || baseline->count("--output")) opts.output = output;

    return anneal::guarded_command(
        [&] {
            if (*run) return anneal::cmd_run(opts, std::cout);
            if (*baseline) return anneal::cmd_baseline(opts, std::cout);
            if (*timescale) return anneal::cmd_timescale(opts, std::cout);
            std::optional<std::string> dest;
            if (plotdata->count("--output")) dest = plot_output;
            return anneal::cmd_plotdata(plot, dest, std::cout);
        },
        std::cerr);
}
