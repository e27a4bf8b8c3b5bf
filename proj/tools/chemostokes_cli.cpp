#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "chemostokes/orchestrate.hpp"

using namespace chemostokes;

namespace {

int env_threads() {
    if (const char* v = std::getenv("CHEMOSTOKES_THREADS")) {
        const int k = std::atoi(v);
        if (k > 0) return k;
    }
    return 1;
}

RunConfig load_with_overrides(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    RunConfig cfg = load_config(config_path);
    for (const std::string& ov : overrides) apply_override(cfg, ov);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chemostokes: 2-D chemotaxis-Stokes simulator and verification harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = env_threads();
    int levels = 3;
    std::vector<std::string> overrides;
    std::string check_dir;
    std::vector<std::string> suites;

    auto* run_cmd = app.add_subcommand("run", "single simulation with per-run checks");
    run_cmd->add_option("--config", config_path, "config file (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default from config)");
    run_cmd->add_option("--threads", threads, "worker threads");
    run_cmd->add_option("--override", overrides, "key=value override (bypasses validation)");

    auto* sweep_cmd = app.add_subcommand("sweep", "epsilon sweep with convergence checks");
    sweep_cmd->add_option("--config", config_path, "config file (JSON)")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory (default from config)");
    sweep_cmd->add_option("--threads", threads, "worker threads");
    sweep_cmd->add_option("--override", overrides, "key=value override (bypasses validation)");

    auto* refine_cmd = app.add_subcommand("refine", "grid/time refinement study");
    refine_cmd->add_option("--config", config_path, "config file (JSON)")->required();
    refine_cmd->add_option("--out", out_dir, "output directory (default from config)");
    refine_cmd->add_option("--levels", levels, "number of (h, dt) levels (>= 3)");
    refine_cmd->add_option("--threads", threads, "worker threads");
    refine_cmd->add_option("--override", overrides, "key=value override (bypasses validation)");

    auto* check_cmd = app.add_subcommand("check", "replay checks on stored run artifacts");
    check_cmd->add_option("dir", check_dir, "run output directory")->required();
    check_cmd->add_option("--suite", suites, "subset of checks to replay");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check_cmd)) return cmd_check(check_dir, suites);

        const RunConfig cfg = load_with_overrides(config_path, overrides);
        const std::string dir = out_dir.empty() ? cfg.output.dir : out_dir;
        if (app.got_subcommand(run_cmd)) return cmd_run(cfg, dir);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(cfg, dir, threads);
        if (app.got_subcommand(refine_cmd)) return cmd_refine(cfg, levels, dir);
    } catch (const BlowupError& e) {
        std::cerr << "blow-up abort: " << e.what() << "\n";
        return kExitBlowup;
    } catch (const ValidationError& e) {
        std::cerr << "validation error [" << e.assumption() << "]: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
