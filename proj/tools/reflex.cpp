// reflex: command-line front end for the barrier solvers and the simulator.

#include "reflex/app.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace reflex;

namespace {

struct Flags {
    std::string config;
    std::string output;
    std::string format;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool skip_mc = false;
    std::vector<int> only;
};

void add_common(CLI::App* sub, Flags& f, bool config_required) {
    auto* c = sub->add_option("--config", f.config, "JSON run configuration");
    if (config_required) c->required();
    c->check(CLI::ExistingFile);
    sub->add_option("--output", f.output, "report file (default: stdout)");
    sub->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", f.seed, "master seed, overrides sim.master_seed");
    sub->add_option("--jobs", f.jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

int report_error(const Error& e, const Flags& f) {
    std::cerr << "reflex: " << to_string(e.kind()) << ": " << e.what() << '\n';
    RunOutcome out;
    out.exit_code = exit_code_for(e);
    out.report = {{"status", "error"},
                  {"exit_code", out.exit_code},
                  {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
    out.csv = "status,kind,message\nerror," + std::string(to_string(e.kind())) + ",\"" + e.what() + "\"\n";
    try {
        OutputSpec target{f.output, f.format == "csv" ? OutputFormat::csv : OutputFormat::json};
        write_outcome(out, target);
    } catch (const Error&) {
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal two-sided reflecting barriers for Levy processes"};
    app.require_subcommand(1);
    Flags f;
    const std::pair<const char*, const char*> commands[] = {
        {"solve-ergodic", "minimize the long-run average cost over barrier pairs"},
        {"solve-discounted", "saddle point of the stopping game (jump-diffusion)"},
        {"simulate", "Monte Carlo estimate at fixed barriers"},
        {"sweep", "solve over a grid of one parameter"},
        {"validate", "run the regression and cross-check suite"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        const bool is_validate = std::string(name) == "validate";
        add_common(sub, f, !is_validate);
        if (is_validate) {
            sub->add_flag("--skip-mc", f.skip_mc, "skip the Monte Carlo criteria");
            sub->add_option("--only", f.only, "criterion ids to run")->check(CLI::Range(1, kCriterionCount));
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        RunConfig config;
        if (!f.config.empty()) {
            config = load_config(f.config);
            if (to_string(config.command) != name)
                throw ConfigError("command: config says '" + std::string(to_string(config.command)) +
                                  "' but the subcommand is '" + name + "'");
        } else {
            config.command = Command::validate;
        }
        if (!f.output.empty()) config.output.path = f.output;
        if (!f.format.empty()) config.output.format = output_format_from_string(f.format);
        f.output = config.output.path;
        f.format = std::string(to_string(config.output.format));

        RunOptions options;
        options.jobs = f.jobs;
        options.seed = f.seed;
        options.skip_monte_carlo = f.skip_mc;
        options.only = f.only;
        const auto outcome = run(config, options);
        for (const auto& line : outcome.summary) std::cerr << line << '\n';
        if (outcome.report.contains("error")) {
            const auto& err = outcome.report["error"];
            std::cerr << "reflex: " << err["kind"].get<std::string>() << ": " << err["message"].get<std::string>()
                      << '\n';
        }
        write_outcome(outcome, config.output);
        return outcome.exit_code;
    } catch (const Error& e) {
        return report_error(e, f);
    }
}
