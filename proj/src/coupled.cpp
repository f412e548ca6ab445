#include "nsch/coupled.hpp"

#include <cstdio>
#include <cstring>

#include "nsch/elliptic.hpp"
#include "nsch/operators.hpp"

namespace nsch {

CHStepConfig CoupledConfig::ch_config() const {
    CHStepConfig c = ch;
    c.dt = dt;
    c.eps0 = eps0;
    c.mobility = mobility;
    c.splitting = splitting;
    return c;
}

MomentumStepConfig CoupledConfig::momentum_config() const {
    MomentumStepConfig c = momentum;
    c.dt = dt;
    c.eps0 = eps0;
    c.mobility = mobility;
    c.convection_form = convection_form;
    return c;
}

std::string diagnostics_csv_header() {
    return "t,E_total,E_kin,E_int,E_bulk,D_visc,D_mix,mass,cont_res,energy_res";
}

std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.E_total,
                  r.E_kin, r.E_int, r.E_bulk, r.D_visc, r.D_mix, r.mass, r.cont_res, r.energy_res);
    return std::string(buf);
}

EnergyBreakdown total_energy(const State& s, const CoupledConfig& cfg) {
    const Grid& g = s.phi.grid;
    EnergyBreakdown e;

    // Kinetic: int rho |v|^2 / 2 with rho interpolated to faces.
    VectorField rho_f = cells_to_faces(s.rho);
    double kin = 0.0;
    for (std::int64_t k = 0; k < s.v.x.size(); ++k) kin += rho_f.x[k] * s.v.x[k] * s.v.x[k];
    for (std::int64_t k = 0; k < s.v.y.size(); ++k) kin += rho_f.y[k] * s.v.y[k] * s.v.y[k];
    e.kinetic = 0.5 * kin * g.cell_area();

    VectorField gp = gradient(s.phi);
    e.interface = 0.5 * cfg.eps0 * dot_faces(gp, gp);

    double bulk = 0.0;
    for (std::int64_t k = 0; k < s.phi.a.size(); ++k) bulk += cfg.potential.f(s.phi.a[k]);
    e.bulk = bulk * g.cell_area() / cfg.eps0;
    return e;
}

double viscous_dissipation(const State& s, const CoupledConfig& cfg) {
    const Grid& g = s.phi.grid;
    TensorField D = sym_gradient(s.v);
    TensorField S = stress_field(cfg.fluid, s.phi, D);
    double acc = 0.0;
    for (std::int64_t k = 0; k < D.xx.size(); ++k)
        acc += S.xx[k] * D.xx[k] + 2.0 * S.xy[k] * D.xy[k] + S.yy[k] * D.yy[k];
    return acc * g.cell_area();
}

double mixing_dissipation(const State& s, const CoupledConfig& cfg) {
    VectorField gmu = gradient(s.mu);
    return cfg.mobility * dot_faces(gmu, gmu);
}

ScalarField continuity_residual_field(const State& before, const State& after,
                                      const VectorField& W, const CoupledConfig& cfg) {
    const Grid& g = before.phi.grid;
    // Mass flux rho^{n+1} W + J^{n+1} on faces.
    VectorField rho_f = cells_to_faces(after.rho);
    VectorField flux(g);
    for (std::int64_t k = 0; k < flux.x.size(); ++k)
        flux.x[k] = rho_f.x[k] * W.x[k] + after.J.x[k];
    for (std::int64_t k = 0; k < flux.y.size(); ++k)
        flux.y[k] = rho_f.y[k] * W.y[k] + after.J.y[k];
    ScalarField div_flux = divergence(flux);

    ScalarField res(g);
    const double idt = 1.0 / cfg.dt;
    for (std::int64_t k = 0; k < res.a.size(); ++k)
        res.a[k] = (after.rho.a[k] - before.rho.a[k]) * idt + div_flux.a[k] - after.R.a[k];
    return res;
}

void refresh_cache(State& s, const CoupledConfig& cfg) {
    s.mu = chemical_potential(s.phi, cfg.potential, cfg.eps0);
    s.rho = ScalarField(s.phi.grid);
    for (std::int64_t k = 0; k < s.rho.a.size(); ++k) s.rho.a[k] = cfg.density.rho(s.phi.a[k]);
    s.J = flux_J(cfg.density, cfg.mobility, s.phi, s.mu);
    s.R = source_R(cfg.density, cfg.mobility, s.phi, s.mu);
}

State make_state(const ScalarField& phi, const VectorField& v, const CoupledConfig& cfg) {
    require_same_grid(phi.grid, v.grid, "make_state");
    State s;
    s.t = 0.0;
    s.phi = phi;
    s.v = v;
    s.pi = ScalarField(phi.grid);
    s.pi.a.fill(0.0);
    refresh_cache(s, cfg);
    return s;
}

State coupled_step(const State& s, const CoupledConfig& cfg, DiagnosticsRecord* rec) {
    VectorField W = stokes_mollify(s.v, cfg.eps_mollify, cfg.momentum.projection);

    CHStepResult ch = ch_step(s.phi, W, cfg.potential, cfg.ch_config());
    MomentumStepResult mo =
        momentum_step(s.v, W, ch.phi, ch.mu, cfg.fluid, cfg.density, cfg.momentum_config());

    State out;
    out.t = s.t + cfg.dt;
    out.phi = std::move(ch.phi);
    out.mu = std::move(ch.mu);
    out.v = std::move(mo.v);
    out.pi = std::move(mo.pi);
    out.rho = ScalarField(out.phi.grid);
    for (std::int64_t k = 0; k < out.rho.a.size(); ++k)
        out.rho.a[k] = cfg.density.rho(out.phi.a[k]);
    out.J = flux_J(cfg.density, cfg.mobility, out.phi, out.mu);
    out.R = source_R(cfg.density, cfg.mobility, out.phi, out.mu);

    if (rec) {
        EnergyBreakdown e_new = total_energy(out, cfg);
        EnergyBreakdown e_old = total_energy(s, cfg);
        rec->t = out.t;
        rec->E_kin = e_new.kinetic;
        rec->E_int = e_new.interface;
        rec->E_bulk = e_new.bulk;
        rec->E_total = e_new.total();
        rec->D_visc = viscous_dissipation(out, cfg);
        rec->D_mix = mixing_dissipation(out, cfg);
        rec->mass = sum_cells(out.phi);
        rec->cont_res = norm2_cells(continuity_residual_field(s, out, W, cfg));
        rec->energy_res = (e_new.total() - e_old.total()) / cfg.dt + rec->D_visc + rec->D_mix;
        rec->ch_iterations = ch.iterations;
        rec->picard_iterations = mo.picard_iterations;
    }
    return out;
}

State run_coupled(const State& initial, const CoupledConfig& cfg, int nsteps,
                  const std::function<void(const DiagnosticsRecord&)>& on_record,
                  const std::function<void(int, const State&)>& on_state) {
    State s = initial;
    if (on_record) {
        DiagnosticsRecord r;
        EnergyBreakdown e = total_energy(s, cfg);
        r.t = s.t;
        r.E_kin = e.kinetic;
        r.E_int = e.interface;
        r.E_bulk = e.bulk;
        r.E_total = e.total();
        r.D_visc = viscous_dissipation(s, cfg);
        r.D_mix = mixing_dissipation(s, cfg);
        r.mass = sum_cells(s.phi);
        on_record(r);
    }
    if (on_state) on_state(0, s);
    for (int n = 1; n <= nsteps; ++n) {
        DiagnosticsRecord r;
        s = coupled_step(s, cfg, on_record ? &r : nullptr);
        if (on_record) on_record(r);
        if (on_state) on_state(n, s);
    }
    return s;
}

} // namespace nsch
