#include "fairsel/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"fair subset selection trainer"};
    app.require_subcommand(1);
    fairsel::cli::Options opt;
    std::uint64_t seed = 0;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"fit", "run IRS once and report metrics"},
        {"grid", "sweep t, lambda and rho, writing one CSV row per cell"},
        {"select", "solve the selection subproblem on a scores CSV"},
        {"export-micp", "write the mixed-integer program as JSON or LP"},
        {"oracle-check", "compare IRS against exhaustive search on tiny instances"},
        {"synth", "write the 2-D gaussian dataset and its schema"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        if (name != "synth") sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output file");
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1u, 256u));
        if (name == "fit" || name == "grid")
            sub->add_option("--blackbox", opt.blackbox, "scorer command (selects the black-box model)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : fairsel::cli::kConfig;
    }
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opt.seed = seed;
    return fairsel::cli::run(sub->get_name(), opt, std::cout, std::cerr);
}
