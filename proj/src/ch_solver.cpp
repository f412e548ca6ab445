#include "nsch/ch_solver.hpp"

#include <algorithm>
#include <cmath>

#include "nsch/constitutive.hpp"
#include "nsch/elliptic.hpp"
#include "nsch/operators.hpp"
#include "nsch/parallel.hpp"
#include "nsch/spectral.hpp"

namespace nsch {

namespace {

// Conservative convective term div(phi W) with a second-order upwind face
// value phi_f = (3 phi_up - phi_upup) / 2.  Telescoping fluxes conserve the
// discrete integral of phi to roundoff (wall fluxes vanish with W).
ScalarField upwind_convection(const ScalarField& phi, const VectorField& W) {
    const Grid& g = phi.grid;
    Array2 fx(W.x.nx(), W.x.ny());
    Array2 fy(W.y.nx(), W.y.ny());
    for (int j = 0; j < fx.ny(); ++j)
        for (int i = 0; i < fx.nx(); ++i) {
            const double w = W.x(i, j);
            const double pf = (w >= 0.0)
                                  ? 1.5 * cell_at(phi, i - 1, j) - 0.5 * cell_at(phi, i - 2, j)
                                  : 1.5 * cell_at(phi, i, j) - 0.5 * cell_at(phi, i + 1, j);
            fx(i, j) = w * pf;
        }
    for (int j = 0; j < fy.ny(); ++j)
        for (int i = 0; i < fy.nx(); ++i) {
            const double w = W.y(i, j);
            const double pf = (w >= 0.0)
                                  ? 1.5 * cell_at(phi, i, j - 1) - 0.5 * cell_at(phi, i, j - 2)
                                  : 1.5 * cell_at(phi, i, j) - 0.5 * cell_at(phi, i, j + 1);
            fy(i, j) = w * pf;
        }
    ScalarField conv(g);
    const double idx = 1.0 / g.dx, idy = 1.0 / g.dy;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double fxr = (g.bc == BC::periodic && i + 1 == g.nx) ? fx(0, j) : fx(i + 1, j);
            const double fyt = (g.bc == BC::periodic && j + 1 == g.ny) ? fy(i, 0) : fy(i, j + 1);
            conv.a(i, j) = (fxr - fx(i, j)) * idx + (fyt - fy(i, j)) * idy;
        }
    return conv;
}

double max_cell(const ScalarField& f, const std::function<double(double)>& fn) {
    double m = -1e300;
    for (std::int64_t k = 0; k < f.a.size(); ++k) m = std::max(m, fn(f.a[k]));
    return m;
}

} // namespace

ScalarField chemical_potential(const ScalarField& phi, const PotentialSpec& pot, double eps0) {
    ScalarField lap = laplacian(phi);
    ScalarField mu(phi.grid);
    for (std::int64_t k = 0; k < phi.a.size(); ++k)
        mu.a[k] = pot.df(phi.a[k]) / eps0 - eps0 * lap.a[k];
    return mu;
}

double mixture_energy(const ScalarField& phi, const PotentialSpec& pot, double eps0) {
    VectorField g = gradient(phi);
    const double grad2 = dot_faces(g, g);
    const double bulk =
        phi.grid.cell_area() *
        parallel_sum(phi.a.size(), [&](std::int64_t k) { return pot.f(phi.a[k]); });
    return 0.5 * eps0 * grad2 + bulk / eps0;
}

CHStepResult ch_step(const ScalarField& phi_n, const VectorField& W, const PotentialSpec& pot,
                     const CHStepConfig& cfg, const ScalarField* forcing) {
    require_same_grid(phi_n.grid, W.grid, "ch_step");
    const Grid& g = phi_n.grid;
    const double dt = cfg.dt, m = cfg.mobility, e0 = cfg.eps0;
    const bool split = (cfg.splitting == PotentialSplitting::convex_split);

    // Explicit part of the right-hand side.
    ScalarField conv = upwind_convection(phi_n, W);
    ScalarField b(g);
    {
        ScalarField lap_n = laplacian(phi_n);
        for (std::int64_t k = 0; k < b.a.size(); ++k) {
            b.a[k] = phi_n.a[k] / dt - conv.a[k];
            if (split) b.a[k] -= m * (pot.alpha / e0) * lap_n.a[k];
            if (forcing) b.a[k] += forcing->a[k];
        }
    }

    // Implicit nonlinearity: q(s) = f0'(s) (convex split) or f'(s).
    auto qfun = [&](double s) { return split ? pot.f0_d(s) : pot.df(s); };

    CHStepResult out;
    out.phi = phi_n;
    ScalarField rhs(g), next(g);
    const double bnorm = std::max(1e-300, norm2_cells(b));
    double lambda = std::max(pot.alpha, max_cell(phi_n, [&](double s) { return pot.f0_d2(s); }));

    for (int it = 1; it <= cfg.max_fp_iter; ++it) {
        lambda = std::max(lambda, max_cell(out.phi, [&](double s) { return pot.f0_d2(s); }));
        // rhs_k = b + m/e0 * Lap( q(phi_k) - Lambda phi_k )
        ScalarField t1(g);
        for (std::int64_t k = 0; k < t1.a.size(); ++k)
            t1.a[k] = (qfun(out.phi.a[k]) - lambda * out.phi.a[k]) / e0;
        ScalarField lap_t1 = laplacian(t1);
        for (std::int64_t k = 0; k < rhs.a.size(); ++k)
            rhs.a[k] = b.a[k] + m * lap_t1.a[k];

        // (1/dt - m Lambda/e0 Lap + m e0 Lap^2) phi_{k+1} = rhs  (exact in
        // transform space: denominator 1/dt + m(e0 lam^2 - Lambda lam / e0)).
        cell_helmholtz_biharmonic_solve(g, rhs.a, 1.0 / dt, -m * lambda / e0, m * e0, next.a);

        double dn = 0.0, nn = 0.0;
        for (std::int64_t k = 0; k < next.a.size(); ++k) {
            const double d = next.a[k] - out.phi.a[k];
            dn += d * d;
            nn += next.a[k] * next.a[k];
        }
        out.phi.a = next.a;
        out.iterations = it;
        if (!std::isfinite(dn)) throw SolverError("ch_step: NaN breakdown in fixed point");
        if (std::sqrt(dn) <= cfg.fp_tol * std::max(1.0, std::sqrt(nn))) break;
        if (it == cfg.max_fp_iter) {
            // Final nonlinear residual for the error report.
            ScalarField q(g);
            for (std::int64_t k = 0; k < q.a.size(); ++k) q.a[k] = qfun(out.phi.a[k]) / e0;
            ScalarField lap_q = laplacian(q);
            ScalarField lap2 = laplacian(laplacian(out.phi));
            double rn = 0.0;
            for (std::int64_t k = 0; k < q.a.size(); ++k) {
                const double r =
                    out.phi.a[k] / dt - m * lap_q.a[k] + m * e0 * lap2.a[k] - b.a[k];
                rn += r * r;
            }
            out.residual = std::sqrt(rn) / bnorm;
            throw SolverError("ch_step: fixed point did not converge in " +
                              std::to_string(cfg.max_fp_iter) + " iterations (relative residual " +
                              std::to_string(out.residual) + "); reduce dt");
        }
    }

    // Nonlinear residual of the accepted iterate (diagnostic).
    {
        ScalarField q(g);
        for (std::int64_t k = 0; k < q.a.size(); ++k) q.a[k] = qfun(out.phi.a[k]) / e0;
        ScalarField lap_q = laplacian(q);
        ScalarField lap2 = laplacian(laplacian(out.phi));
        double rn = 0.0;
        for (std::int64_t k = 0; k < q.a.size(); ++k) {
            const double r = out.phi.a[k] / dt - m * lap_q.a[k] + m * e0 * lap2.a[k] - b.a[k];
            rn += r * r;
        }
        out.residual = std::sqrt(rn) / bnorm;
    }

    out.mu = chemical_potential(out.phi, pot, e0);
    return out;
}

CHTrajectory ch_solution_operator(const ScalarField& phi0,
                                  const std::function<VectorField(double)>& velocity, double T,
                                  int nsteps, const PotentialSpec& pot, const CHStepConfig& cfg,
                                  double eps_mollify) {
    CHTrajectory tr;
    CHStepConfig step_cfg = cfg;
    step_cfg.dt = T / nsteps;
    EllipticSolverConfig ell;  // multigrid defaults for the mollifier projections
    tr.times.push_back(0.0);
    tr.phi.push_back(phi0);
    tr.mu.push_back(chemical_potential(phi0, pot, cfg.eps0));
    ScalarField phi = phi0;
    for (int n = 0; n < nsteps; ++n) {
        const double t = n * step_cfg.dt;
        VectorField W = stokes_mollify(velocity(t), eps_mollify, ell);
        CHStepResult r = ch_step(phi, W, pot, step_cfg);
        phi = r.phi;
        tr.times.push_back(t + step_cfg.dt);
        tr.phi.push_back(r.phi);
        tr.mu.push_back(std::move(r.mu));
    }
    return tr;
}

LipschitzProbe ch_lipschitz_probe(const ScalarField& phi0,
                                  const std::function<VectorField(double)>& v1,
                                  const std::function<VectorField(double)>& v2, double T,
                                  int nsteps, const PotentialSpec& pot, const CHStepConfig& cfg,
                                  double eps_mollify) {
    CHTrajectory t1 = ch_solution_operator(phi0, v1, T, nsteps, pot, cfg, eps_mollify);
    CHTrajectory t2 = ch_solution_operator(phi0, v2, T, nsteps, pot, cfg, eps_mollify);
    LipschitzProbe out;
    for (std::size_t k = 0; k < t1.times.size(); ++k) {
        ScalarField d = t1.phi[k];
        axpy_cells(-1.0, t2.phi[k], d);
        out.sup_phi_diff = std::max(out.sup_phi_diff, norm2_cells(d));
        VectorField dv = v1(t1.times[k]);
        axpy_faces(-1.0, v2(t1.times[k]), dv);
        out.sup_vel_diff = std::max(out.sup_vel_diff, norm2_faces(dv));
    }
    out.ratio = out.sup_phi_diff / std::max(1e-300, std::sqrt(T) * out.sup_vel_diff);
    return out;
}

} // namespace nsch
