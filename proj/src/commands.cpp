#include "nsch/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "nsch/analysis.hpp"
#include "nsch/config.hpp"
#include "nsch/operators.hpp"
#include "nsch/parallel.hpp"
#include "nsch/snapshot_io.hpp"

namespace fs = std::filesystem;

namespace nsch {

namespace {

std::string tag6(int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", n);
    return buf;
}

void write_field_set(const fs::path& dir, int step, const State& s, bool binary) {
    const Grid& g = s.phi.grid;
    SnapshotHeader h;
    h.dx = g.dx;
    h.dy = g.dy;
    h.time = s.t;
    h.bc = g.bc;
    h.binary = binary;

    auto put = [&](const char* name, const Array2& a) {
        h.nx = a.nx();
        h.ny = a.ny();
        write_snapshot((dir / (std::string(name) + "_" + tag6(step) + ".dat")).string(), a, h);
    };
    put("phi", s.phi.a);
    put("mu", s.mu.a);
    put("ux", s.v.x);
    put("uy", s.v.y);
    put("pi", s.pi.a);
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("NSCH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 256) return int(v);
        throw ConfigError(std::string("NSCH_THREADS='") + env + "' is not a thread count in 1..256");
    }
    return 1;
}

// Sorted snapshot indices in a run directory (those with a phi_ file).
std::vector<int> snapshot_steps(const fs::path& dir) {
    std::vector<int> steps;
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() == 4 + 6 + 4 && name.rfind("phi_", 0) == 0 &&
            name.substr(name.size() - 4) == ".dat")
            steps.push_back(std::atoi(name.substr(4, 6).c_str()));
    }
    std::sort(steps.begin(), steps.end());
    if (steps.empty())
        throw IoError("no phi_*.dat snapshots found in '" + dir.string() + "'");
    return steps;
}

Array2 read_part(const fs::path& dir, const char* name, int step, SnapshotHeader& h) {
    const fs::path p = dir / (std::string(name) + "_" + tag6(step) + ".dat");
    return read_snapshot(p.string(), h);
}

struct Sample {
    double t = 0.0;
    ScalarField phi;
    ScalarField mu;
    VectorField v;
};

Sample read_sample(const fs::path& dir, int step, const Grid* expect) {
    SnapshotHeader h;
    Array2 phi = read_part(dir, "phi", step, h);
    Grid g{h.nx, h.ny, h.dx, h.dy, h.bc};
    if (expect && !(g == *expect))
        throw IoError("snapshot " + tag6(step) + " grid differs from the first snapshot");
    Sample s;
    s.t = h.time;
    s.phi = ScalarField(g);
    s.phi.a = std::move(phi);
    SnapshotHeader hm;
    s.mu = ScalarField(g);
    s.mu.a = read_part(dir, "mu", step, hm);
    s.v = VectorField(g);
    SnapshotHeader hx, hy;
    Array2 ux = read_part(dir, "ux", step, hx);
    Array2 uy = read_part(dir, "uy", step, hy);
    if (ux.nx() != g.ux_nx() || ux.ny() != g.ux_ny() || uy.nx() != g.uy_nx() ||
        uy.ny() != g.uy_ny())
        throw IoError("snapshot " + tag6(step) + " velocity dimensions do not match its grid");
    s.v.x = std::move(ux);
    s.v.y = std::move(uy);
    return s;
}

// Momentum flux tensor H with <d_t(rho v), eta> = <H, grad eta> for
// solenoidal zero-trace eta: H = v (x) (rho v + J) + eps0 grad phi (x)
// grad phi - S(phi, Dv), assembled on the staggered tensor layout.
MacTensor momentum_flux_tensor(const Sample& s, const CoupledConfig& cc) {
    const Grid& g = s.phi.grid;
    MacTensor H(g);

    ScalarField rho(g);
    for (std::int64_t k = 0; k < rho.a.size(); ++k) rho.a[k] = cc.density.rho(s.phi.a[k]);
    VectorField rho_f = cells_to_faces(rho);
    VectorField J = flux_J(cc.density, cc.mobility, s.phi, s.mu);
    VectorField c(g);
    for (std::int64_t k = 0; k < c.x.size(); ++k) c.x[k] = rho_f.x[k] * s.v.x[k] + J.x[k];
    for (std::int64_t k = 0; k < c.y.size(); ++k) c.y[k] = rho_f.y[k] * s.v.y[k] + J.y[k];

    VectorField gp = gradient(s.phi);
    TensorField D = sym_gradient(s.v);
    TensorField S = stress_field(cc.fluid, s.phi, D);

    // Cell entries.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double vx = 0.5 * (ux_at(s.v, i, j) + ux_at(s.v, i + 1, j));
            const double cx = 0.5 * (ux_at(c, i, j) + ux_at(c, i + 1, j));
            const double vy = 0.5 * (uy_at(s.v, i, j) + uy_at(s.v, i, j + 1));
            const double cy = 0.5 * (uy_at(c, i, j) + uy_at(c, i, j + 1));
            const double gx = 0.5 * (ux_at(gp, i, j) + ux_at(gp, i + 1, j));
            const double gy = 0.5 * (uy_at(gp, i, j) + uy_at(gp, i, j + 1));
            H.xx(i, j) = vx * cx + cc.eps0 * gx * gx - S.xx(i, j);
            H.yy(i, j) = vy * cy + cc.eps0 * gy * gy - S.yy(i, j);
        }

    // Corner entries: products of 2-point averages, stress from the corner
    // shear and corner-interpolated coefficient.
    CornerField sh = shear_at_corners(s.v);
    CornerField phin = cells_to_corners(s.phi);
    for (int j = 0; j < H.xy.ny(); ++j)
        for (int i = 0; i < H.xy.nx(); ++i) {
            const double vx = 0.5 * (ux_at(s.v, i, j - 1) + ux_at(s.v, i, j));
            const double cy = 0.5 * (uy_at(c, i - 1, j) + uy_at(c, i, j));
            const double vy = 0.5 * (uy_at(s.v, i - 1, j) + uy_at(s.v, i, j));
            const double cx = 0.5 * (ux_at(c, i, j - 1) + ux_at(c, i, j));
            const double gx = 0.5 * (ux_at(gp, i, j - 1) + ux_at(gp, i, j));
            const double gy = 0.5 * (uy_at(gp, i - 1, j) + uy_at(gp, i, j));
            const double a_n = cc.fluid.viscous_coefficient(
                phin.a(i, j), sym_tensor_norm(0.0, sh.a(i, j), 0.0));
            const double sxy = a_n * sh.a(i, j);
            H.xy(i, j) = vx * cy + cc.eps0 * gx * gy - sxy;
            H.yx(i, j) = vy * cx + cc.eps0 * gx * gy - sxy;
        }
    return H;
}

} // namespace

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
    try {
        RunConfig c = parse_config_file(config_path);
        out << describe_config(c);
        out << "config ok\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    }
}

int cmd_run(const std::string& config_path, const std::string& output_dir, bool binary_snapshots,
            int threads, std::ostream& out, std::ostream& err) {
    RunConfig c;
    try {
        c = parse_config_file(config_path);
        set_num_threads(resolve_threads(threads));
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    }
    const bool binary = binary_snapshots || c.binary_snapshots;

    try {
        const fs::path dir(output_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory '" + output_dir + "'");

        {
            std::ofstream meta(dir / "run.meta");
            if (!meta) throw IoError("cannot write run.meta");
            meta << "# run metadata (canonical configuration echo)\n";
            meta << "# steps = " << c.nsteps() << "\n";
            meta << "# threads = " << num_threads() << "\n";
            meta << canonical_config(c);
        }

        std::ofstream csv(dir / "diagnostics.csv");
        if (!csv) throw IoError("cannot write diagnostics.csv");
        csv << diagnostics_csv_header() << "\n";

        const CoupledConfig cc = c.coupled_config();
        State s0 = initial_state(c);
        const int nsteps = c.nsteps();
        const int every = c.snapshot_every;

        State last = run_coupled(
            s0, cc, nsteps,
            [&](const DiagnosticsRecord& r) { csv << diagnostics_csv_row(r) << "\n"; },
            [&](int step, const State& st) {
                const bool due = (step == 0) || (step == nsteps) || (every > 0 && step % every == 0);
                if (!due) return;
                write_field_set(dir, step, st, binary);
                out << "snapshot " << tag6(step) << "  t = " << st.t << "\n";
            });
        csv.flush();
        if (!csv) throw IoError("diagnostics.csv write failed");

        EnergyBreakdown e = total_energy(last, cc);
        out << "run complete: " << nsteps << " steps, t = " << last.t
            << ", E_total = " << e.total() << ", mass = " << sum_cells(last.phi) << "\n";
        return 0;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    }
}

int cmd_analyze(const std::string& input_dir, const std::string& mode, std::ostream& out,
                std::ostream& err) {
    if (mode != "truncation" && mode != "pressure") {
        err << "config error: unknown analyze mode '" << mode
            << "' (expected truncation|pressure)\n";
        return 2;
    }
    try {
        const fs::path dir(input_dir);
        RunConfig c = parse_config_file((dir / "run.meta").string());
        const CoupledConfig cc = c.coupled_config();
        std::vector<int> steps = snapshot_steps(dir);

        std::vector<Sample> samples;
        samples.reserve(steps.size());
        const Grid* expect = nullptr;
        for (int st : steps) {
            samples.push_back(read_sample(dir, st, expect));
            expect = &samples.front().phi.grid;
        }

        if (mode == "truncation") {
            std::ofstream csv(dir / "truncation_report.csv");
            if (!csv) throw IoError("cannot write truncation_report.csv");
            csv << "step,t,level,gradient_constant,max_upsilon,truncated_fraction\n";
            double worst = 0.0;
            for (std::size_t k = 0; k < samples.size(); ++k) {
                const Sample& s = samples[k];
                for (int L = 1; L <= 6; ++L) {
                    TruncationGradientReport rep = truncation_gradient_bound(s.v, L);
                    // Fraction of cells where the cutoff actually bites.
                    ScalarField qx(s.phi.grid), qy(s.phi.grid);
                    faces_to_cells(s.v, qx, qy);
                    std::int64_t cut = 0;
                    for (std::int64_t q = 0; q < qx.a.size(); ++q)
                        if (truncation_upsilon(std::hypot(qx.a[q], qy.a[q]), L) < L - 1e-12) ++cut;
                    const double frac = double(cut) / double(qx.a.size());
                    char row[256];
                    std::snprintf(row, sizeof(row), "%d,%.17g,%d,%.17g,%.17g,%.17g", steps[k], s.t,
                                  L, rep.constant, rep.max_upsilon, frac);
                    csv << row << "\n";
                    worst = std::max(worst, rep.constant);
                }
            }
            out << "truncation analysis: " << samples.size()
                << " snapshots, worst gradient constant = " << worst << "\n";
            out << "wrote " << (dir / "truncation_report.csv").string() << "\n";
            return 0;
        }

        // mode == "pressure"
        if (samples.size() < 2)
            throw IoError("pressure analysis needs at least two snapshots (have " +
                          std::to_string(samples.size()) + ")");
        PressureInput in;
        for (const Sample& s : samples) {
            in.times.push_back(s.t);
            // Momentum u = rho v on faces.
            ScalarField rho(s.phi.grid);
            for (std::int64_t k = 0; k < rho.a.size(); ++k)
                rho.a[k] = cc.density.rho(s.phi.a[k]);
            VectorField rho_f = cells_to_faces(rho);
            VectorField u(s.phi.grid);
            for (std::int64_t k = 0; k < u.x.size(); ++k) u.x[k] = rho_f.x[k] * s.v.x[k];
            for (std::int64_t k = 0; k < u.y.size(); ++k) u.y[k] = rho_f.y[k] * s.v.y[k];
            in.u.push_back(std::move(u));
            in.H.push_back(momentum_flux_tensor(s, cc));
        }
        PressureOptions opt;
        opt.poisson = c.elliptic;
        opt.check_relation = true;
        PressureResult res = pressure_decompose(in, opt);

        std::ofstream csv(dir / "pressure_report.csv");
        if (!csv) throw IoError("cannot write pressure_report.csv");
        csv << "k,t,norm_pi_h,norm_pi0_tilde,norm_pi0\n";
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            char row[256];
            std::snprintf(row, sizeof(row), "%zu,%.17g,%.17g,%.17g,%.17g", k, res.times[k],
                          norm2_cells(res.pi_h[k]), norm2_cells(res.pi0_tilde[k]),
                          k ? norm2_cells(res.pi0[k - 1]) : 0.0);
            csv << row << "\n";
        }
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            write_scalar_snapshot((dir / ("pi_h_" + tag6(steps[k]) + ".dat")).string(),
                                  res.pi_h[k], res.times[k], false);
            if (k)
                write_scalar_snapshot((dir / ("pi0_" + tag6(steps[k]) + ".dat")).string(),
                                      res.pi0[k - 1], res.times[k], false);
        }
        out << "pressure analysis: " << samples.size() << " snapshots\n";
        out << "  relation residual (probes) = " << res.relation_residual << "\n";
        out << "  sup |pi_h|_2 = " << res.sup_pi_h << ",  sup |u_k - u_0|_2 = " << res.sup_u_diff
            << "\n";
        out << "  |pi_0|_{l2(t)} = " << res.norm_pi0 << ",  |H|_{l2(t)} = " << res.norm_H << "\n";
        out << "wrote " << (dir / "pressure_report.csv").string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    } catch (const fs::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace nsch
