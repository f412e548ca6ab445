#pragma once
// ============================================================================
// Coupled stepper: Lie splitting of the phase-field and momentum equations,
// plus the energy/mass/continuity diagnostics.
//
// One step of the full system:
//   1. W = stokes_mollify(v^n, eps_m)            (shared smooth velocity)
//   2. (phi^{n+1}, mu^{n+1}) = ch_step(phi^n, W)
//   3. (v^{n+1}, pi^{n+1})   = momentum_step(v^n, W, phi^{n+1}, mu^{n+1})
//
// Diagnostics per step (one CSV row, layout pinned by tests):
//   t, E_total, E_kin, E_int, E_bulk, D_visc, D_mix, mass, cont_res, energy_res
// where
//   E_kin   = int rho(phi) |v|^2 / 2          (face-midpoint quadrature)
//   E_int   = int eps0 |grad phi|^2 / 2       (face-midpoint)
//   E_bulk  = int f(phi) / eps0               (cell-midpoint)
//   D_visc  = int S(phi, Dv) : Dv             (cell-centred S and D)
//   D_mix   = m int |grad mu|^2               (face-midpoint)
//   mass    = int phi
//   cont_res  = | (rho^{n+1}-rho^n)/dt + div(rho^{n+1} W + J^{n+1}) - R^{n+1} |_2
//   energy_res = (E^{n+1}-E^n)/dt + D_visc^{n+1} + D_mix^{n+1}
//
// All reductions are deterministic; every double is printed with "%.17g",
// so repeated runs with identical config, seed and thread count produce
// bitwise-identical diagnostics streams.
// ============================================================================

#include <functional>
#include <vector>

#include "nsch/ch_solver.hpp"
#include "nsch/constitutive.hpp"
#include "nsch/ns_solver.hpp"

namespace nsch {

/// Full simulation state plus cached derived fields.
struct State {
    double t = 0.0;
    ScalarField phi;
    ScalarField mu;
    VectorField v;
    ScalarField pi;

    // Cached from (phi, mu): density at cells, relative flux on faces,
    // mass source at cells.  refresh_cache() rebuilds them.
    ScalarField rho;
    VectorField J;
    ScalarField R;
};

struct CoupledConfig {
    double dt = 1e-3;
    double eps0 = 1.0;
    double mobility = 1.0;
    double eps_mollify = 0.05;
    PotentialSpec potential;
    FluidParams fluid;
    DensityLaw density{1.0, 1.0};
    PotentialSplitting splitting = PotentialSplitting::convex_split;
    ConvectionForm convection_form = ConvectionForm::advective;
    CHStepConfig ch;                  // dt/eps0/mobility copied from above
    MomentumStepConfig momentum;      // dt/eps0/mobility copied from above

    CHStepConfig ch_config() const;
    MomentumStepConfig momentum_config() const;
};

struct DiagnosticsRecord {
    double t = 0.0;
    double E_total = 0.0;
    double E_kin = 0.0;
    double E_int = 0.0;
    double E_bulk = 0.0;
    double D_visc = 0.0;
    double D_mix = 0.0;
    double mass = 0.0;
    double cont_res = 0.0;
    double energy_res = 0.0;

    // Step bookkeeping (not part of the CSV).
    int ch_iterations = 0;
    int picard_iterations = 0;
};

/// Header and row formatting of the diagnostics CSV ("%.17g" per value).
std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const DiagnosticsRecord& r);

struct EnergyBreakdown {
    double kinetic = 0.0;
    double interface = 0.0;
    double bulk = 0.0;
    double total() const { return kinetic + interface + bulk; }
};

EnergyBreakdown total_energy(const State& s, const CoupledConfig& cfg);
double viscous_dissipation(const State& s, const CoupledConfig& cfg);
double mixing_dissipation(const State& s, const CoupledConfig& cfg);

/// Pointwise residual field of the discrete mass-density balance across a
/// completed step (see header comment); W is the mollified velocity that
/// produced the step.
ScalarField continuity_residual_field(const State& before, const State& after,
                                      const VectorField& W, const CoupledConfig& cfg);

/// Build a State from (phi, v): computes mu, caches rho/J/R, zero pi.
State make_state(const ScalarField& phi, const VectorField& v, const CoupledConfig& cfg);

/// Rebuild the cached rho/J/R (and mu) from phi.
void refresh_cache(State& s, const CoupledConfig& cfg);

/// Advance one coupled step; fills the diagnostics record for the
/// completed step (time stamped at the new time level).
State coupled_step(const State& s, const CoupledConfig& cfg, DiagnosticsRecord* rec = nullptr);

/// Run nsteps steps.  on_record is called once for the initial state (with
/// zero residuals) and once per completed step; on_state (if given) is
/// called with (step_index, state) for the initial state and after every
/// step — the CLI uses it for snapshot cadence.
State run_coupled(const State& initial, const CoupledConfig& cfg, int nsteps,
                  const std::function<void(const DiagnosticsRecord&)>& on_record,
                  const std::function<void(int, const State&)>& on_state = {});

} // namespace nsch
