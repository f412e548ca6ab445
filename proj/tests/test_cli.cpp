// ============================================================================
// Process-level tests of the `nsch` command-line binary: exit codes
// (0 ok, 2 config error, 3 solver failure, 4 I/O error), the files a run
// produces, thread-count resolution (--threads beats NSCH_THREADS beats 1),
// bitwise reproducibility of diagnostics, and both analyze modes.
//
// The binary path is injected by the build as NSCH_CLI_PATH; every test
// spawns it through std::system and inspects captured stdout/stderr.
// ============================================================================

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nsch/config.hpp"
#include "nsch/coupled.hpp"
#include "nsch/errors.hpp"
#include "nsch/snapshot_io.hpp"

namespace fs = std::filesystem;

namespace nsch {
namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    ASSERT_TRUE(bool(out)) << "cannot write " << path;
}

// Run the CLI binary with `args`, optionally under `env_prefix`
// (e.g. "NSCH_THREADS=3"), capturing exit code and both streams.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int seq = 0;
    const std::string base = testing::TempDir() + "/cli_capture_" + std::to_string(seq++);
    std::string cmd;
    if (!env_prefix.empty()) cmd += env_prefix + " ";
    cmd += std::string(NSCH_CLI_PATH) + " " + args + " > " + base + ".out 2> " + base + ".err";
    const int status = std::system(cmd.c_str());
    CmdResult r;
    if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp(base + ".out");
    r.err = slurp(base + ".err");
    return r;
}

std::string fresh_dir(const std::string& stem) {
    static int seq = 0;
    const std::string d = testing::TempDir() + "/" + stem + "_" + std::to_string(seq++);
    fs::remove_all(d);
    return d;
}

// A deliberately small, fast case: 16x16 periodic box, five steps,
// snapshots at steps {0, 2, 4, 5} (cadence 2 plus the forced final step).
const char* kSmallConfig = R"cfg(
[domain]
nx = 16
ny = 16
lx = 1.0
ly = 1.0
bc = periodic

[time]
dt = 1e-3
t_end = 5e-3
snapshot_every = 2

[fluids]
rho1 = 1.0
rho2 = 2.0
nu1 = 0.2
nu2 = 0.1

[model]
eps0 = 0.1
mobility = 1e-2
eps_mollify = 1e-3

[initial]
type = spinodal
amplitude = 0.2
seed = 11
)cfg";

std::string write_small_config() {
    const std::string path = fresh_dir("cfg") + ".cfg";
    spit(path, kSmallConfig);
    return path;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

// ============================================================================
// validate + argument plumbing
// ============================================================================

TEST(Cli, ValidateAcceptsAConfigFile) {
    const std::string cfg = write_small_config();
    CmdResult r = run_cli("validate --config " + cfg);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.out, "config ok")) << r.out;
    EXPECT_TRUE(r.err.empty()) << r.err;
}

TEST(Cli, ValidateRejectsBadConfigWithExitCode2) {
    const std::string cfg = fresh_dir("bad") + ".cfg";
    spit(cfg, "[junk]\nx = 1\n");
    CmdResult r = run_cli("validate --config " + cfg);
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(contains(r.err, "config error")) << r.err;
    EXPECT_TRUE(contains(r.err, "unknown section")) << r.err;
}

TEST(Cli, MissingConfigFileIsAnIoError) {
    CmdResult r = run_cli("validate --config " + testing::TempDir() + "/does_not_exist.cfg");
    EXPECT_EQ(r.code, 4);
    EXPECT_TRUE(contains(r.err, "cannot open config file")) << r.err;
}

TEST(Cli, BadUsageExitsWith2) {
    // No subcommand at all.
    EXPECT_EQ(run_cli("").code, 2);
    // Unknown subcommand.
    EXPECT_EQ(run_cli("frobnicate").code, 2);
    // Required option missing.
    EXPECT_EQ(run_cli("validate").code, 2);
    EXPECT_EQ(run_cli("run --config x.cfg").code, 2);
    EXPECT_EQ(run_cli("analyze --input somewhere").code, 2);
    // --threads outside its documented 1..256 range.
    const std::string cfg = write_small_config();
    const std::string out = fresh_dir("thr0");
    EXPECT_EQ(run_cli("run --config " + cfg + " --output-dir " + out + " --threads 0").code, 2);
    EXPECT_EQ(run_cli("run --config " + cfg + " --output-dir " + out + " --threads 300").code, 2);
}

// ============================================================================
// run
// ============================================================================

TEST(Cli, RunWritesDiagnosticsMetaAndSnapshots) {
    const std::string cfg = write_small_config();
    const std::string dir = fresh_dir("run");
    CmdResult r = run_cli("run --config " + cfg + " --output-dir " + dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.out, "snapshot 000000")) << r.out;
    EXPECT_TRUE(contains(r.out, "run complete")) << r.out;

    // diagnostics.csv: exact header plus one row per recorded state (initial
    // state + 5 steps).
    const std::string csv = slurp(dir + "/diagnostics.csv");
    ASSERT_FALSE(csv.empty());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), diagnostics_csv_header());
    EXPECT_EQ(count_lines(csv), 1 + 5 + 1);

    // run.meta is a canonical config echo: it must itself parse, and must
    // reproduce the requested discretization.
    RunConfig meta = parse_config_file(dir + "/run.meta");
    EXPECT_EQ(meta.grid.nx, 16);
    EXPECT_EQ(meta.grid.ny, 16);
    EXPECT_EQ(meta.nsteps(), 5);
    EXPECT_TRUE(contains(slurp(dir + "/run.meta"), "# threads = 1"));

    // Snapshot cadence: every 2 steps plus the forced final step; all five
    // fields are present for each due step and for no other step.
    for (int step : {0, 2, 4, 5})
        for (const char* f : {"phi", "mu", "ux", "uy", "pi"}) {
            char name[32];
            std::snprintf(name, sizeof(name), "%s_%06d.dat", f, step);
            EXPECT_TRUE(fs::exists(dir + "/" + name)) << name;
        }
    EXPECT_FALSE(fs::exists(dir + "/phi_000001.dat"));
    EXPECT_FALSE(fs::exists(dir + "/phi_000003.dat"));

    // Headers carry the simulation clock and the grid geometry.
    SnapshotHeader h;
    Array2 phi = read_snapshot(dir + "/phi_000004.dat", h);
    EXPECT_EQ(h.nx, 16);
    EXPECT_EQ(h.ny, 16);
    EXPECT_EQ(h.bc, BC::periodic);
    EXPECT_NEAR(h.time, 4e-3, 1e-15);
    EXPECT_FALSE(h.binary);
    EXPECT_EQ(phi.size(), 16 * 16);
}

TEST(Cli, IdenticalRunsAreBitwiseIdentical) {
    const std::string cfg = write_small_config();
    const std::string d1 = fresh_dir("rep");
    const std::string d2 = fresh_dir("rep");
    ASSERT_EQ(run_cli("run --config " + cfg + " --output-dir " + d1 + " --threads 2").code, 0);
    ASSERT_EQ(run_cli("run --config " + cfg + " --output-dir " + d2 + " --threads 2").code, 0);

    const std::string csv1 = slurp(d1 + "/diagnostics.csv");
    EXPECT_FALSE(csv1.empty());
    EXPECT_EQ(csv1, slurp(d2 + "/diagnostics.csv"));
    EXPECT_EQ(slurp(d1 + "/phi_000005.dat"), slurp(d2 + "/phi_000005.dat"));
    EXPECT_EQ(slurp(d1 + "/ux_000005.dat"), slurp(d2 + "/ux_000005.dat"));
    EXPECT_EQ(slurp(d1 + "/run.meta"), slurp(d2 + "/run.meta"));
}

TEST(Cli, ThreadCountResolutionOrder) {
    const std::string cfg = write_small_config();

    // Explicit flag.
    const std::string d1 = fresh_dir("thr");
    ASSERT_EQ(run_cli("run --config " + cfg + " --output-dir " + d1 + " --threads 2").code, 0);
    EXPECT_TRUE(contains(slurp(d1 + "/run.meta"), "# threads = 2"));

    // Environment fallback when the flag is absent.
    const std::string d2 = fresh_dir("thr");
    ASSERT_EQ(run_cli("run --config " + cfg + " --output-dir " + d2, "NSCH_THREADS=3").code, 0);
    EXPECT_TRUE(contains(slurp(d2 + "/run.meta"), "# threads = 3"));

    // The flag wins over the environment.
    const std::string d3 = fresh_dir("thr");
    ASSERT_EQ(
        run_cli("run --config " + cfg + " --output-dir " + d3 + " --threads 2", "NSCH_THREADS=3")
            .code,
        0);
    EXPECT_TRUE(contains(slurp(d3 + "/run.meta"), "# threads = 2"));

    // A malformed environment value is a configuration error.
    const std::string d4 = fresh_dir("thr");
    CmdResult bad = run_cli("run --config " + cfg + " --output-dir " + d4, "NSCH_THREADS=soup");
    EXPECT_EQ(bad.code, 2);
    EXPECT_TRUE(contains(bad.err, "NSCH_THREADS")) << bad.err;
    CmdResult big = run_cli("run --config " + cfg + " --output-dir " + d4, "NSCH_THREADS=999");
    EXPECT_EQ(big.code, 2);
}

TEST(Cli, BinarySnapshotFlagSwitchesEncoding) {
    const std::string cfg = write_small_config();
    const std::string da = fresh_dir("enc");
    const std::string db = fresh_dir("enc");
    ASSERT_EQ(run_cli("run --config " + cfg + " --output-dir " + da).code, 0);
    ASSERT_EQ(
        run_cli("run --config " + cfg + " --output-dir " + db + " --binary-snapshots").code, 0);

    const std::string ascii_head = slurp(da + "/phi_000005.dat").substr(0, 32);
    const std::string binary_head = slurp(db + "/phi_000005.dat").substr(0, 32);
    EXPECT_TRUE(contains(ascii_head, "ascii")) << ascii_head;
    EXPECT_TRUE(contains(binary_head, "binary")) << binary_head;

    // Both encodings are exact, so the decoded fields agree bitwise.
    SnapshotHeader ha, hb;
    Array2 pa = read_snapshot(da + "/phi_000005.dat", ha);
    Array2 pb = read_snapshot(db + "/phi_000005.dat", hb);
    EXPECT_FALSE(ha.binary);
    EXPECT_TRUE(hb.binary);
    ASSERT_EQ(pa.size(), pb.size());
    for (std::int64_t k = 0; k < pa.size(); ++k) ASSERT_EQ(pa[k], pb[k]) << "element " << k;
}

TEST(Cli, UnwritableOutputDirectoryIsAnIoError) {
    const std::string cfg = write_small_config();
    const std::string blocker = fresh_dir("blocker");
    spit(blocker, "a plain file where a directory is needed\n");
    CmdResult r = run_cli("run --config " + cfg + " --output-dir " + blocker + "/out");
    EXPECT_EQ(r.code, 4);
    EXPECT_TRUE(contains(r.err, "io error")) << r.err;
}

TEST(Cli, SolverFailureExitsWith3) {
    // A shear layer under a strongly shear-thickening law with a Picard
    // budget of one sweep: the frozen-coefficient update cannot settle, and
    // the momentum solver must report failure rather than continue.
    const std::string cfg = fresh_dir("stiff") + ".cfg";
    spit(cfg, R"cfg(
[domain]
nx = 16
ny = 16
lx = 1.0
ly = 1.0

[time]
dt = 1e-3
t_end = 1e-3

[fluids]
nu1 = 0.5
nu2 = 0.5
power_index = 3.0

[model]
eps0 = 0.1
mobility = 1e-2
eps_mollify = 1e-3

[solver]
picard_tol = 1e-16
picard_max_iter = 1

[initial]
type = shear-layer
amplitude = 1.0
width = 0.05
)cfg");
    const std::string dir = fresh_dir("stiffout");
    CmdResult r = run_cli("run --config " + cfg + " --output-dir " + dir);
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(contains(r.err, "solver failure")) << r.err;
    EXPECT_TRUE(contains(r.err, "Picard")) << r.err;
}

// ============================================================================
// analyze
// ============================================================================

namespace {

// One completed small run shared by the analyze tests.
std::string completed_run_dir() {
    static std::string dir;
    if (dir.empty()) {
        const std::string cfg = write_small_config();
        dir = fresh_dir("analysed");
        CmdResult r = run_cli("run --config " + cfg + " --output-dir " + dir);
        EXPECT_EQ(r.code, 0) << r.err;
    }
    return dir;
}

} // namespace

TEST(Cli, AnalyzeTruncationWritesReport) {
    const std::string dir = completed_run_dir();
    CmdResult r = run_cli("analyze --input " + dir + " --mode truncation");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.out, "truncation analysis")) << r.out;

    const std::string csv = slurp(dir + "/truncation_report.csv");
    ASSERT_FALSE(csv.empty());
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "step,t,level,gradient_constant,max_upsilon,truncated_fraction");
    // 4 snapshots x 6 truncation levels, plus the header.
    EXPECT_EQ(count_lines(csv), 1 + 4 * 6);
}

TEST(Cli, AnalyzePressureWritesReportAndFields) {
    const std::string dir = completed_run_dir();
    CmdResult r = run_cli("analyze --input " + dir + " --mode pressure");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.out, "pressure analysis")) << r.out;
    EXPECT_TRUE(contains(r.out, "relation residual")) << r.out;

    const std::string csv = slurp(dir + "/pressure_report.csv");
    ASSERT_FALSE(csv.empty());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,t,norm_pi_h,norm_pi0_tilde,norm_pi0");
    EXPECT_EQ(count_lines(csv), 1 + 4);

    // Harmonic part for every snapshot; time-difference part from the first
    // interval onwards only.
    EXPECT_TRUE(fs::exists(dir + "/pi_h_000000.dat"));
    EXPECT_TRUE(fs::exists(dir + "/pi_h_000005.dat"));
    EXPECT_FALSE(fs::exists(dir + "/pi0_000000.dat"));
    EXPECT_TRUE(fs::exists(dir + "/pi0_000002.dat"));
    EXPECT_TRUE(fs::exists(dir + "/pi0_000005.dat"));

    SnapshotHeader h;
    Array2 pih = read_snapshot(dir + "/pi_h_000000.dat", h);
    EXPECT_EQ(h.nx, 16);
    EXPECT_EQ(pih.size(), 16 * 16);
}

TEST(Cli, AnalyzeRejectsBadModeAndBadInput) {
    const std::string dir = completed_run_dir();

    CmdResult mode = run_cli("analyze --input " + dir + " --mode nonsense");
    EXPECT_EQ(mode.code, 2);
    EXPECT_TRUE(contains(mode.err, "unknown analyze mode")) << mode.err;

    CmdResult missing = run_cli("analyze --input " + testing::TempDir() +
                                "/no_such_run --mode truncation");
    EXPECT_EQ(missing.code, 4);

    // A directory with a config echo but no snapshots.
    const std::string empty = fresh_dir("norun");
    fs::create_directories(empty);
    fs::copy_file(dir + "/run.meta", empty + "/run.meta");
    CmdResult bare = run_cli("analyze --input " + empty + " --mode truncation");
    EXPECT_EQ(bare.code, 4);
    EXPECT_TRUE(contains(bare.err, "no phi_")) << bare.err;
}

TEST(Cli, AnalyzePressureNeedsTwoSnapshots) {
    // Copy the run, keep only the step-0 snapshot set.
    const std::string src = completed_run_dir();
    const std::string dir = fresh_dir("single");
    fs::create_directories(dir);
    fs::copy_file(src + "/run.meta", dir + "/run.meta");
    for (const char* f : {"phi", "mu", "ux", "uy", "pi"})
        fs::copy_file(src + "/" + std::string(f) + "_000000.dat",
                      dir + "/" + std::string(f) + "_000000.dat");

    // Truncation analysis is happy with one snapshot...
    EXPECT_EQ(run_cli("analyze --input " + dir + " --mode truncation").code, 0);
    // ...pressure decomposition is not: it needs at least one time interval.
    CmdResult r = run_cli("analyze --input " + dir + " --mode pressure");
    EXPECT_EQ(r.code, 4);
    EXPECT_TRUE(contains(r.err, "at least two snapshots")) << r.err;
}

} // namespace nsch
