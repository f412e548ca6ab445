// ============================================================================
// nsch — two-phase power-law mixture simulator and verification toolkit.
//
//   nsch validate --config FILE
//   nsch run      --config FILE --output-dir DIR [--binary-snapshots]
//                 [--threads N]            (NSCH_THREADS honoured when absent)
//   nsch analyze  --input DIR --mode truncation|pressure
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
// ============================================================================

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nsch/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"two-phase power-law mixture simulator"};
    app.require_subcommand(1);

    std::string config_path, output_dir, input_dir, mode;
    bool binary_snapshots = false;
    int threads = 0;

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a configuration");
    validate->add_option("--config", config_path, "configuration file")->required();

    CLI::App* run = app.add_subcommand("run", "integrate the coupled system");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--output-dir", output_dir, "output directory")->required();
    run->add_flag("--binary-snapshots", binary_snapshots, "write binary field snapshots");
    run->add_option("--threads", threads, "worker threads (default: NSCH_THREADS or 1)")
        ->check(CLI::Range(1, 256));

    CLI::App* analyze = app.add_subcommand("analyze", "post-process a run directory");
    analyze->add_option("--input", input_dir, "run directory")->required();
    analyze->add_option("--mode", mode, "truncation|pressure")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad usage is a configuration error
    }

    if (validate->parsed()) return nsch::cmd_validate(config_path, std::cout, std::cerr);
    if (run->parsed())
        return nsch::cmd_run(config_path, output_dir, binary_snapshots, threads, std::cout,
                             std::cerr);
    return nsch::cmd_analyze(input_dir, mode, std::cout, std::cerr);
}
