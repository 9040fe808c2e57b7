#include <iostream>

#include "CLI11.hpp"
#include "wavefront/commands.hpp"

int main(int argc, char** argv) {
    namespace cmd = wavefront::commands;
    CLI::App app{"Numerical analytic-wavefront toolkit"};
    app.require_subcommand(1, 1);

    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    for (const auto& name : cmd::names()) {
        auto* sub = app.add_subcommand(name, cmd::description(name));
        sub->add_option("-c,--config", config, "experiment config file (YAML)")->required();
        sub->add_option("--seed", seed, "seed for every stochastic sample");
        sub->add_option("-o,--out", out, "output directory (overrides $WAVEFRONT_OUTPUT_DIR and the config)");
        sub->add_option("-j,--threads", threads, "worker threads (0: all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cmd::kUsage;
    }

    const auto* sub = app.get_subcommands().front();
    cmd::Options opt;
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--out")) opt.output_dir = out;
    if (sub->count("--threads")) opt.threads = threads;
    return cmd::run(sub->get_name(), config, opt, std::cerr);
}
