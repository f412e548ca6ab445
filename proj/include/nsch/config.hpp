#pragma once
// ============================================================================
// Run configuration: INI-style "key = value" files with [section] headers.
//
// Parser rules (all violations raise ConfigError with line numbers):
//   * '#' starts a comment; blank lines ignored.
//   * "[section]" opens a section; "key = value" assigns within it.
//   * duplicate keys are rejected (both line numbers reported);
//   * unknown sections/keys are rejected (typo safety);
//   * every value is type- and range-checked by validate().
//
// Sections and keys (defaults in parentheses):
//   [domain]  nx, ny, lx, ly, bc = periodic|physical
//   [time]    dt, t_end, snapshot_every (0: first+last only)
//   [fluids]  rho1, rho2, nu1, nu2, power_index (2.0), kappa_reg (1e-8),
//             omega (0: derive), c1 (0: derive)
//   [model]   eps0 (1), mobility (1), eps_mollify (0.05), delta_b (0.1),
//             alpha (1), convection_form = advective|conservative,
//             splitting = convex-split|fully-implicit
//   [solver]  elliptic_method = multigrid|conjugate-gradient,
//             elliptic_rel_tol (1e-10), elliptic_max_iter (400),
//             fp_tol (1e-10), max_fp_iter (60),
//             picard_tol (1e-9), picard_max_iter (30),
//             viscous_rel_tol (1e-11), viscous_max_iter (2000)
//   [initial] type = spinodal|stripe|blob|shear-layer|quiescent,
//             amplitude, seed, width, radius, mean, value
//   [output]  binary_snapshots (false)
// ============================================================================

#include <string>

#include "nsch/coupled.hpp"
#include "nsch/grid.hpp"

namespace nsch {

struct InitialSpec {
    enum class Type { spinodal, stripe, blob, shear_layer, quiescent };
    Type type = Type::spinodal;
    double amplitude = 0.5;     // noise/velocity amplitude
    unsigned long long seed = 1;
    double width = 2.0;         // interface / shear-layer width
    double radius = 0.0;        // blob radius (0: lx/4)
    double mean = 0.0;          // mean order parameter (spinodal)
    double value = 0.0;         // constant phi (quiescent)
};

struct RunConfig {
    Grid grid;
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshot_every = 0;

    double rho1 = 1.0, rho2 = 1.0;
    double nu1 = 1.0, nu2 = 1.0;
    double power_index = 2.0;
    double kappa_reg = 1e-8;
    double omega = 0.0, c1 = 0.0;

    double eps0 = 1.0;
    double mobility = 1.0;
    double eps_mollify = 0.05;
    double delta_b = 0.1;
    double alpha = 1.0;
    ConvectionForm convection_form = ConvectionForm::advective;
    PotentialSplitting splitting = PotentialSplitting::convex_split;

    EllipticSolverConfig elliptic;
    double fp_tol = 1e-10;
    int max_fp_iter = 60;
    double picard_tol = 1e-9;
    int picard_max_iter = 30;
    double viscous_rel_tol = 1e-11;
    int viscous_max_iter = 2000;

    InitialSpec initial;
    bool binary_snapshots = false;

    int nsteps() const;                    // round(t_end / dt), >= 1
    CoupledConfig coupled_config() const;  // assemble solver configuration
};

/// Parse + validate a config file.  Throws ConfigError (with line numbers)
/// on any syntactic or semantic problem, IoError if unreadable.
RunConfig parse_config_file(const std::string& path);

/// Parse from an in-memory string (same rules; `name` appears in messages).
RunConfig parse_config_text(const std::string& text, const std::string& name = "<memory>");

/// Canonical echo: a config file reproducing exactly this configuration
/// with every key explicit.  parse_config_text(canonical_config(c)) == c.
std::string canonical_config(const RunConfig& c);

/// Human-readable validation summary (derived quantities, stability hints).
std::string describe_config(const RunConfig& c);

/// Built-in presets: "spinodal_64", "shear_powerlaw", "density_contrast".
RunConfig preset_config(const std::string& name);

/// Initial state for a configuration (deterministic in the seed; the
/// velocity is projected to the discrete solenoidal space).
State initial_state(const RunConfig& c);

} // namespace nsch
