// Command-line entry point: aftershock <command> [--config FILE] [--set key=value]...

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aftershock/app.hpp"
#include "aftershock/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Omori aftershock calibration and prediction for intraday returns"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> sets;
    std::string input;
    std::string output_dir;
    std::string params;
    app.add_option("-c,--config", config_path, "flat key=value configuration file");
    app.add_option("-s,--set", sets, "override a configuration key (key=value), repeatable");
    app.add_option("-i,--input", input, "input CSV (prices for ingest, ensemble otherwise)");
    app.add_option("-o,--output-dir", output_dir, "output directory");
    app.add_option("-p,--params", params, "model params file");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"ingest", "build the daily-return ensemble from a price CSV"},
        {"simulate", "sample a synthetic ensemble from the model"},
        {"calibrate", "estimate D, alpha and beta from an ensemble"},
        {"omori", "count empirical aftershocks and fit the Omori law"},
        {"predict", "analytic aftershock prediction from calibrated params"},
        {"report", "assemble figures and tables from existing artifacts"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(aftershock::ExitCode::usage);
    }

    std::map<std::string, std::string> overrides;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "usage error: --set expects key=value, got '" << s << "'\n";
            return static_cast<int>(aftershock::ExitCode::usage);
        }
        overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (!input.empty()) overrides["input"] = input;
    if (!output_dir.empty()) overrides["output_dir"] = output_dir;
    if (!params.empty()) overrides["params"] = params;

    const auto command = aftershock::parse_command(app.get_subcommands().front()->get_name());
    try {
        const auto config = aftershock::load_config(config_path, overrides);
        return aftershock::run(*command, config, std::cout, std::cerr);
    } catch (const aftershock::Error& e) {
        std::cerr << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    }
}
