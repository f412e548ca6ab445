#pragma once
// ============================================================================
// CLI subcommand implementations (shared between the `nsch` binary and the
// process-level tests).  Each returns the process exit code:
//   0 success, 2 configuration error, 3 solver failure, 4 I/O error.
// ============================================================================

#include <ostream>
#include <string>

namespace nsch {

/// `validate --config F`: parse + validate, print a summary.
int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err);

/// `run --config F --output-dir D [--binary-snapshots] [--threads N]`:
/// integrate, writing diagnostics.csv, run.meta and field snapshots.
int cmd_run(const std::string& config_path, const std::string& output_dir,
            bool binary_snapshots, int threads, std::ostream& out, std::ostream& err);

/// `analyze --input D --mode truncation|pressure`: post-process a run
/// directory; writes a report CSV (and pressure fields for mode=pressure).
int cmd_analyze(const std::string& input_dir, const std::string& mode, std::ostream& out,
                std::ostream& err);

} // namespace nsch
