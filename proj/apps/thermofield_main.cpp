// Driver binary: one subcommand per experiment, configuration from a key = value
// file plus command-line overrides, error taxonomy mapped onto exit codes.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermofield/cli.hpp"
#include "thermofield/errors.hpp"

namespace {

namespace cli = tfld::cli;

struct DriverOptions {
    std::string experiment;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string beta;
    std::string lambda;
    std::string output;
    std::string seed;
};

int run_driver(const DriverOptions& options) {
    cli::RunConfig config =
        cli::default_config(cli::experiment_from_name(options.experiment));
    if (!options.config_path.empty()) cli::apply_config_file(config, options.config_path);
    const auto convenience = [&](const char* key, const std::string& text,
                                 const char* flag) {
        if (!text.empty()) cli::apply_assignment(config, key, text, flag);
    };
    convenience("model.beta", options.beta, "--beta");
    convenience("model.lambda", options.lambda, "--lambda");
    convenience("run.output", options.output, "--output");
    convenience("run.seed", options.seed, "--seed");
    for (const auto& assignment : options.overrides) {
        const auto equals = assignment.find('=');
        if (equals == std::string::npos)
            throw tfld::config_error("--set expects key=value, got '" + assignment + "'");
        cli::apply_assignment(config, assignment.substr(0, equals),
                              assignment.substr(equals + 1), "--set " + assignment);
    }
    const cli::RunResult result = cli::run(config);
    for (const auto& path : result.outputs) std::printf("wrote %s\n", path.c_str());
    std::printf("%s\n", result.summary.c_str());
    return 0;
}

void print_schema() {
    for (const auto& entry : cli::config_schema()) {
        std::string help = entry.help;
        if (!entry.choices.empty()) {
            help += " {";
            for (std::size_t k = 0; k < entry.choices.size(); ++k)
                help += (k == 0 ? "" : ", ") + entry.choices[k];
            help += "}";
        }
        std::printf("%-26s %-10s default=%-22s %s\n", entry.key.c_str(),
                    entry.kind.c_str(),
                    entry.default_value.empty() ? "(unset)" : entry.default_value.c_str(),
                    help.c_str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermofield: truncated glued-representation laboratory for "
                 "positive-temperature spin-boson models"};
    app.set_version_flag("--version", cli::kToolVersion);
    app.require_subcommand(1);

    DriverOptions options;
    CLI::App* schema_command =
        app.add_subcommand("schema", "print the configuration schema and defaults");
    for (const auto& name : cli::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("-c,--config", options.config_path,
                        "key = value configuration file with optional [sections]");
        sub->add_option("--set", options.overrides,
                        "configuration override key=value, repeatable");
        sub->add_option("--beta", options.beta, "shorthand for model.beta");
        sub->add_option("--lambda", options.lambda, "shorthand for model.lambda");
        sub->add_option("-o,--output", options.output, "shorthand for run.output");
        sub->add_option("--seed", options.seed, "shorthand for run.seed");
        sub->callback([&options, name]() { options.experiment = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    try {
        if (schema_command->parsed()) {
            print_schema();
            return 0;
        }
        return run_driver(options);
    } catch (const tfld::config_error& error) {
        std::fprintf(stderr, "config error: %s\n", error.what());
        return 2;
    } catch (const tfld::unsupported_error& error) {
        std::fprintf(stderr, "unsupported: %s\n", error.what());
        return 2;
    } catch (const tfld::budget_error& error) {
        std::fprintf(stderr, "budget error: %s\n", error.what());
        return 3;
    } catch (const tfld::numerical_error& error) {
        std::fprintf(stderr, "numerical error: %s\n", error.what());
        return 4;
    } catch (const std::exception& error) {
        std::fprintf(stderr, "internal error: %s\n", error.what());
        return 4;
    }
}
