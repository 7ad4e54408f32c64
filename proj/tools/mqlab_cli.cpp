#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mqlab/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"multiscale PDE experiment harness"};
    std::string config_path, preset_name, out_dir = "out";
    std::size_t jobs = 1;
    bool verify = false, table1 = false;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--preset", preset_name, "named preset configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_flag("--verify", verify, "run the structural invariant suite");
    app.add_flag("--table1", table1, "emit the cost-exponent reproduction table");
    CLI11_PARSE(app, argc, argv);

    try {
        bool ok = true;
        if (verify) {
            const bool pass = mqlab::cli::verify_suite();
            std::printf("verify: %s\n", pass ? "pass" : "fail");
            ok = ok && pass;
        }
        if (table1) {
            const bool pass = mqlab::cli::run_table1(out_dir);
            std::printf("table1: %s (%s/table1.csv)\n", pass ? "pass" : "fail", out_dir.c_str());
            ok = ok && pass;
        }
        if (!config_path.empty() || !preset_name.empty()) {
            if (!config_path.empty() && !preset_name.empty())
                throw std::invalid_argument("pass either --config or --preset, not both");
            mqlab::cli::Config cfg = config_path.empty() ? mqlab::cli::preset(preset_name)
                                                         : mqlab::cli::load_config(config_path);
            if (cfg.values.empty())
                throw std::invalid_argument(
                    "config: empty; required keys: equation, model, eps1 (delta defaults to "
                    "eps1, d and n default to 1)");
            auto manifests = mqlab::cli::run_sweep(cfg, out_dir, jobs);
            for (std::size_t i = 0; i < manifests.size(); ++i) {
                std::printf("run %zu: %s (%zu outputs, %.2fs)\n", i,
                            manifests[i].ok ? "pass" : "fail", manifests[i].outputs.size(),
                            manifests[i].wall_time);
                ok = ok && manifests[i].ok;
            }
        } else if (!verify && !table1) {
            std::fprintf(stderr, "nothing to do: pass --config, --preset, --verify or --table1\n");
            return 2;
        }
        return ok ? 0 : 1;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
