#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "morsesplit/pipeline.hpp"

using namespace morsesplit;

namespace {

// Exit codes: 0 pass, 1 gate failure, 2 config error.
int run_analyze(const std::string& config_path, const std::string& out_dir) {
    RunConfig config = RunConfig::from_file(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    bool ok = true;
    // The config may list follow-up commands; analyze runs them in order.
    std::vector<std::string> commands = config.commands;
    if (commands.empty()) commands = {"analyze"};
    if (std::find(commands.begin(), commands.end(), "analyze") == commands.end())
        commands.insert(commands.begin(), "analyze");
    for (const auto& cmd : commands) {
        if (cmd == "analyze") {
            const AnalysisReport rep = cmd_analyze(config);
            std::cout << "analyze: " << rep.problem_name << "  nu=" << rep.nu << " mu=" << rep.mu
                      << "  report -> " << config.output_dir << "/report.json\n";
            for (const auto& e : rep.ledger)
                std::cout << "  " << (e.pass ? "PASS" : "FAIL") << " " << e.name
                          << " measured=" << e.measured << " threshold=" << e.threshold
                          << (e.hard ? "" : " [soft]") << "\n";
            ok = ok && rep.hard_gates_pass();
        } else if (cmd == "verify") {
            ok = (cmd_verify(config, false, std::cout) == 0) && ok;
        } else if (cmd == "report") {
            cmd_report(config.output_dir, std::cout);
        }
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"splitting, reduction and critical-group analysis of discretized variational "
                 "functionals at degenerate critical points"};
    app.require_subcommand(1);

    std::string config_path, out_dir, report_dir;
    bool whole_catalog = false;

    auto* analyze = app.add_subcommand("analyze", "run the full pipeline and write the report");
    analyze->add_option("--config", config_path, "run configuration (JSON)")->required();
    analyze->add_option("--out", out_dir, "output directory (overrides the config)");

    auto* verify = app.add_subcommand("verify", "run the module invariant suites");
    verify->add_option("--config", config_path, "run configuration (JSON)");
    verify->add_flag("--catalog", whole_catalog, "verify every built-in problem");

    auto* report = app.add_subcommand("report", "render the summary of a prior analyze run");
    report->add_option("--out", report_dir, "output directory of the prior run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return run_analyze(config_path, out_dir);
        if (verify->parsed()) {
            RunConfig config;
            if (!config_path.empty()) {
                config = RunConfig::from_file(config_path);
            } else if (!whole_catalog) {
                std::cerr << "verify needs --config or --catalog\n";
                return 2;
            }
            return cmd_verify(config, whole_catalog, std::cout);
        }
        if (report->parsed()) return cmd_report(report_dir, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
