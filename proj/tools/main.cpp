#include "tauflow/config.hpp"
#include "tauflow/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tauflow::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tauflow - finite-difference laboratory for the F_tau parabolic flows"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool print_config = false;

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment from a config file");
    run_cmd->add_option("config", config_path, "key = value config file")->required();
    run_cmd->add_option("--override,-o", overrides, "override one key=value (repeatable)");
    run_cmd->add_flag("--print-config", print_config,
                      "echo the effective config to stdout before running");

    CLI11_PARSE(app, argc, argv);

    try {
        tauflow::ExperimentConfig cfg = tauflow::parse_config(read_file(config_path));
        for (const std::string& ov : overrides) tauflow::apply_override(cfg, ov);
        tauflow::validate_config(cfg);
        if (print_config) std::cout << tauflow::emit_config(cfg);

        const tauflow::RunOutcome outcome = tauflow::execute(cfg);
        std::cout << "tauflow: " << tauflow::kind_name(cfg.kind) << " -> " << outcome.message
                  << " (exit " << outcome.exit_code << ")\n";
        return outcome.exit_code;
    } catch (const tauflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    }
}
