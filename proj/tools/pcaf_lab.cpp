// pcaf-lab: run a scenario config and write its artifacts.
//
//   pcaf-lab oracle|metric|classify|mc|conditions|martingale run <config.json> [--set k=v]... [--out prefix]
//
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 config error, 3 runtime error.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcaf/error.hpp"
#include "pcaf/scenario.hpp"

namespace {

int exit_code_for(pcaf::ErrorCode code) {
    switch (code) {
    case pcaf::ErrorCode::ConfigInvalid:
    case pcaf::ErrorCode::UnsupportedFormat:
        return 2;
    default:
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positive continuous additive functionals lab"};
    app.require_subcommand(1);
    std::string action, config_path, out_prefix;
    std::vector<std::string> sets;
    for (const char* name : {"oracle", "metric", "classify", "mc", "conditions", "martingale"}) {
        auto* sub = app.add_subcommand(name, "run a scenario of kind " + pcaf::lab::kind_for_command(name));
        sub->add_option("action", action, "only 'run' is supported")->required()->check(CLI::IsMember({"run"}));
        sub->add_option("config", config_path, "scenario JSON")->required();
        sub->add_option("--set", sets, "override key.path=value (JSON value or plain string)");
        sub->add_option("--out", out_prefix, "output path prefix");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        nlohmann::json config;
        {
            std::ifstream in(config_path);
            if (!in) throw pcaf::Error(pcaf::ErrorCode::ConfigInvalid, "cannot read config '" + config_path + "'");
            try {
                config = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw pcaf::Error(pcaf::ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
            }
        }
        if (!config.is_object()) throw pcaf::Error(pcaf::ErrorCode::ConfigInvalid, "config must be a JSON object");
        const auto kind = pcaf::lab::kind_for_command(command);
        if (!config.contains("kind")) config["kind"] = kind;
        if (config["kind"] != kind)
            throw pcaf::Error(pcaf::ErrorCode::ConfigInvalid, "kind: config is '" + config["kind"].dump() + "' but the subcommand runs '" + kind + "'");
        for (const auto& s : sets) pcaf::lab::apply_override(config, s);
        if (!out_prefix.empty()) config["output"] = out_prefix;

        const auto result = pcaf::lab::run_scenario(config);
        const auto files = pcaf::lab::write_artifacts(result);
        std::cout << result.summary();
        for (const auto& f : files) std::cout << "wrote " << f << "\n";
        return result.passed() ? 0 : 1;
    } catch (const pcaf::Error& e) {
        std::cerr << "pcaf-lab: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "pcaf-lab: runtime error: " << e.what() << "\n";
        return 3;
    }
}
